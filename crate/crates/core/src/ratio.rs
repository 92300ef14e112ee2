//! Exact rational helpers. Densities are `Ratio<u64>`, indices are big
//! rationals so sums over many class pairs never overflow or round.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Density = Ratio<u64>;
pub type Index = BigRational;

/// Parses `a/b`, an integer, or a plain decimal such as `0.125` into an exact
/// non-negative rational.
pub fn parse_ratio(text: &str) -> Result<Density> {
    let text = text.trim();
    let bad = || Error::arg(format!("not a non-negative rational: {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        return Ok(Ratio::new(num, den));
    }
    let int: u64 = text.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(int))
}

pub fn fmt_ratio(r: &Density) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn fmt_index(q: &Index) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_index(text: &str) -> Result<Index> {
    let bad = || Error::arg(format!("not a rational: {text:?}"));
    let (num, den) = text.split_once('/').ok_or_else(bad)?;
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn to_f64(r: &Density) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn index_to_f64(q: &Index) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn density_to_index(r: &Density) -> Index {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `true` when `count > eps * total`, evaluated exactly.
pub fn exceeds_fraction(count: usize, eps: &Density, total: usize) -> bool {
    (count as u128) * (*eps.denom() as u128) > (*eps.numer() as u128) * (total as u128)
}

/// Smallest count strictly above `eps * total`.
pub fn min_above_fraction(eps: &Density, total: usize) -> usize {
    let num = (*eps.numer() as u128) * (total as u128);
    let den = *eps.denom() as u128;
    (num / den + 1) as usize
}
