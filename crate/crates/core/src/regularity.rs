//! ε-regular pair testing, the partition index `q`, and the analytic
//! inequalities the refinement argument leans on, as executable checks.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{density, DenseGraph, PartiteHost, VertexSet};
use crate::partition::Partition;
use crate::ratio::{fmt_ratio, min_above_fraction, parse_ratio, Density, Index};

/// Largest side length accepted by the exhaustive checker.
pub const EXHAUSTIVE_HARD_CAP: usize = 20;
/// Default side cap for exhaustive checking.
pub const EXHAUSTIVE_DEFAULT_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Certified by exhaustive search.
    Regular,
    /// A verified witness exists.
    Irregular,
    /// Sampling found no witness.
    ProbablyRegular,
}

impl Verdict {
    pub fn code(self) -> char {
        match self {
            Verdict::Regular => 'R',
            Verdict::Irregular => 'I',
            Verdict::ProbablyRegular => 'P',
        }
    }

    pub fn from_code(c: &str) -> Option<Verdict> {
        match c {
            "R" => Some(Verdict::Regular),
            "I" => Some(Verdict::Irregular),
            "P" => Some(Verdict::ProbablyRegular),
            _ => None,
        }
    }

    pub fn is_irregular(self) -> bool {
        self == Verdict::Irregular
    }
}

/// Sub-pair `(X', Y')` of `(A, B)` whose density deviates from `d(A, B)` by
/// strictly more than ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x: VertexSet,
    pub y: VertexSet,
    pub deviation: Density,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairStats {
    pub density: Density,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl PairStats {
    /// Re-derives the witness from raw adjacency: sizes strictly above the
    /// ε-fractions and deviation strictly above ε.
    pub fn witness_is_valid(
        &self,
        g: &DenseGraph,
        a: &VertexSet,
        b: &VertexSet,
        eps: &Density,
    ) -> bool {
        let Some(w) = &self.witness else {
            return self.verdict != Verdict::Irregular;
        };
        if !w.x.is_subset(a) || !w.y.is_subset(b) || w.x.is_empty() || w.y.is_empty() {
            return false;
        }
        if w.x.len() < min_above_fraction(eps, a.len()) || w.y.len() < min_above_fraction(eps, b.len())
        {
            return false;
        }
        let (Ok(whole), Ok(sub)) = (density(g, a, b), density(g, &w.x, &w.y)) else {
            return false;
        };
        let dev = if sub > whole { sub - whole } else { whole - sub };
        dev == w.deviation && dev > *eps && whole == self.density
    }
}

/// Which refinement arithmetic [`crate::partition::refine_step`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefineMode {
    /// Chunk size `floor(c / 4^k)`, exactly `4^k - 2^k` chunks per class.
    Faithful,
    /// Atom-ordered classes cut into a common number of equal chunks.
    Practical,
}

/// How pair verdicts are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictMode {
    /// Exhaustive when both sides fit under the cap, sampled otherwise.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityParams {
    pub epsilon: Density,
    pub min_classes: usize,
    pub max_rounds: usize,
    /// Refinement never produces classes smaller than this.
    pub class_size_floor: usize,
    pub mode: RefineMode,
    pub verdicts: VerdictMode,
    pub sample_trials: usize,
    pub exhaustive_cap: usize,
    /// Practical mode: preferred chunk count per class. `None` picks the
    /// largest atom count seen in the round.
    pub split: Option<usize>,
    pub seed: u64,
}

impl RegularityParams {
    pub fn new(epsilon: Density) -> Result<Self> {
        let params = RegularityParams {
            epsilon,
            min_classes: 1,
            max_rounds: 8,
            class_size_floor: 1,
            mode: RefineMode::Practical,
            verdicts: VerdictMode::Auto,
            sample_trials: 32,
            exhaustive_cap: EXHAUSTIVE_DEFAULT_CAP,
            split: None,
            seed: 0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.numer() == &0 || self.epsilon > Ratio::new(1, 2) {
            return Err(Error::arg(format!(
                "epsilon {} must lie in (0, 1/2]",
                fmt_ratio(&self.epsilon)
            )));
        }
        if *self.epsilon.denom() > u32::MAX as u64 {
            return Err(Error::arg("epsilon denominator too large"));
        }
        if self.min_classes == 0 {
            return Err(Error::arg("min_classes must be at least 1"));
        }
        if self.class_size_floor == 0 {
            return Err(Error::arg("class_size_floor must be at least 1"));
        }
        if self.exhaustive_cap > EXHAUSTIVE_HARD_CAP {
            return Err(Error::Capacity(format!(
                "exhaustive cap {} above hard limit {EXHAUSTIVE_HARD_CAP}",
                self.exhaustive_cap
            )));
        }
        if matches!(self.split, Some(h) if h < 2) {
            return Err(Error::arg("split must be at least 2"));
        }
        Ok(())
    }
}

/// Candidate witness with the ordering used to pick a single one: larger
/// deviation first, then larger `|X'| + |Y'|`, then smaller masks.
struct Candidate {
    dev_num: u128,
    dev_den: u128,
    x: VertexSet,
    y: VertexSet,
}

impl Candidate {
    fn cmp_key(&self, other: &Candidate) -> Ordering {
        (self.dev_num * other.dev_den)
            .cmp(&(other.dev_num * self.dev_den))
            .then((self.x.len() + self.y.len()).cmp(&(other.x.len() + other.y.len())))
            .then_with(|| cmp_mask(&other.x, &self.x))
            .then_with(|| cmp_mask(&other.y, &self.y))
    }

    fn into_witness(self) -> Witness {
        Witness {
            x: self.x,
            y: self.y,
            deviation: reduce(self.dev_num, self.dev_den),
        }
    }
}

fn cmp_mask(a: &VertexSet, b: &VertexSet) -> Ordering {
    a.words().iter().rev().cmp(b.words().iter().rev())
}

fn reduce(num: u128, den: u128) -> Density {
    let g = num_integer::gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    Ratio::new(
        u64::try_from(n).expect("deviation numerator fits u64"),
        u64::try_from(d).expect("deviation denominator fits u64"),
    )
}

/// |sub/(xs*ys) - all/(na*nb)| as an unreduced fraction.
fn deviation(sub: usize, xs: usize, ys: usize, all: usize, na: usize, nb: usize) -> (u128, u128) {
    let lhs = sub as u128 * na as u128 * nb as u128;
    let rhs = all as u128 * xs as u128 * ys as u128;
    (lhs.abs_diff(rhs), xs as u128 * ys as u128 * na as u128 * nb as u128)
}

fn exceeds(num: u128, den: u128, eps: &Density) -> bool {
    num * (*eps.denom() as u128) > (*eps.numer() as u128) * den
}

fn check_sides(a: &VertexSet, b: &VertexSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::arg("pair sides must be nonempty"));
    }
    if !a.is_disjoint(b) {
        return Err(Error::arg("pair sides must be disjoint"));
    }
    if a.len() > u16::MAX as usize || b.len() > u16::MAX as usize {
        return Err(Error::Capacity("pair side above 65535 vertices".into()));
    }
    Ok(())
}

/// Decides ε-regularity of `(A, B)` exactly, using [`EXHAUSTIVE_DEFAULT_CAP`].
pub fn check_pair_exhaustive(
    g: &DenseGraph,
    a: &VertexSet,
    b: &VertexSet,
    eps: &Density,
) -> Result<PairStats> {
    check_pair_exhaustive_capped(g, a, b, eps, EXHAUSTIVE_DEFAULT_CAP)
}

/// Exact ε-regularity test.
///
/// Subsets `X'` of `A` are visited in Gray-code order while the neighbour
/// counts `|N(y) ∩ X'|` are updated incrementally. For a fixed `X'` and a fixed
/// size `|Y'| = t`, the extreme values of `e(X', Y')` come from the `t`
/// largest and `t` smallest counts, so the largest deviation over all
/// admissible `Y'` is read off two sorted prefixes instead of enumerating
/// `2^|B|` subsets.
pub fn check_pair_exhaustive_capped(
    g: &DenseGraph,
    a: &VertexSet,
    b: &VertexSet,
    eps: &Density,
    cap: usize,
) -> Result<PairStats> {
    check_sides(a, b)?;
    let cap = cap.min(EXHAUSTIVE_HARD_CAP);
    if a.len() > cap || b.len() > cap {
        return Err(Error::Capacity(format!(
            "exhaustive check limited to sides <= {cap}, got {}x{}; use sampling",
            a.len(),
            b.len()
        )));
    }
    let a_ids = a.to_vec();
    let b_ids = b.to_vec();
    let (na, nb) = (a_ids.len(), b_ids.len());
    let rows: Vec<u32> = a_ids
        .iter()
        .map(|&u| {
            b_ids
                .iter()
                .enumerate()
                .filter(|&(_, &v)| g.has_edge(u, v))
                .fold(0u32, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let all: usize = rows.iter().map(|r| r.count_ones() as usize).sum();
    let dens = Ratio::new(all as u64, (na * nb) as u64);
    let x_min = min_above_fraction(eps, na);
    let y_min = min_above_fraction(eps, nb);

    let mut best: Option<(u128, u128, u32, u32)> = None;
    if x_min <= na && y_min <= nb {
        let mut cnt = vec![0usize; nb];
        let mut mask = 0u32;
        let mut by_count: Vec<Vec<usize>> = vec![Vec::new(); na + 1];
        for step in 1u32..(1 << na) {
            let bit = step.trailing_zeros() as usize;
            mask ^= 1 << bit;
            let adding = mask >> bit & 1 == 1;
            for (j, c) in cnt.iter_mut().enumerate() {
                if rows[bit] >> j & 1 == 1 {
                    if adding {
                        *c += 1;
                    } else {
                        *c -= 1;
                    }
                }
            }
            let xs = mask.count_ones() as usize;
            if xs < x_min {
                continue;
            }
            for bucket in by_count.iter_mut() {
                bucket.clear();
            }
            for (j, &c) in cnt.iter().enumerate() {
                by_count[c].push(j);
            }
            // Descending by count, ascending index among ties; and ascending.
            let desc: Vec<usize> = by_count.iter().rev().flatten().copied().collect();
            let asc: Vec<usize> = by_count.iter().flatten().copied().collect();
            for order in [&desc, &asc] {
                let mut sum = 0usize;
                let mut ymask = 0u32;
                for (t, &j) in order.iter().enumerate() {
                    sum += cnt[j];
                    ymask |= 1 << j;
                    let t = t + 1;
                    if t < y_min {
                        continue;
                    }
                    let (num, den) = deviation(sum, xs, t, all, na, nb);
                    if !exceeds(num, den, eps) {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bn, bd, bx, by)) => (num * bd)
                            .cmp(&(bn * den))
                            .then((xs + t).cmp(&(bx.count_ones() as usize + by.count_ones() as usize)))
                            .then(bx.cmp(&mask))
                            .then(by.cmp(&ymask))
                            == Ordering::Greater,
                    };
                    if better {
                        best = Some((num, den, mask, ymask));
                    }
                }
            }
        }
    }

    Ok(match best {
        None => PairStats {
            density: dens,
            verdict: Verdict::Regular,
            witness: None,
        },
        Some((num, den, xm, ym)) => {
            let universe = a.universe();
            let pick = |ids: &[usize], m: u32| {
                VertexSet::from_iter(
                    universe,
                    ids.iter().enumerate().filter(|&(i, _)| m >> i & 1 == 1).map(|(_, &v)| v),
                )
            };
            PairStats {
                density: dens,
                verdict: Verdict::Irregular,
                witness: Some(Witness {
                    x: pick(&a_ids, xm),
                    y: pick(&b_ids, ym),
                    deviation: reduce(num, den),
                }),
            }
        }
    })
}

/// One-sided randomized regularity test.
///
/// Three candidate families are tried, each chosen so that on a uniformly
/// random pair the tested sub-pair's density is an unbiased estimate of the
/// whole pair's density:
///
/// * neighbourhood splits: for a pivot edge `x0 y0`, the sets `N(y0) - x0`
///   and `N(x0) - y0` (and their complements); selection only looks at the
///   pivot row and column, which are excluded from the tested sub-pair;
/// * held-out degree splits: vertices of one side ranked by degree into a
///   random half of the other side, tested against the other half;
/// * random subset pairs of at least half of each side.
///
/// Every candidate is measured exactly; `Irregular` is returned only with a
/// witness that re-verifies. Finding nothing yields `ProbablyRegular`.
pub fn check_pair_sampled(
    g: &DenseGraph,
    a: &VertexSet,
    b: &VertexSet,
    eps: &Density,
    trials: usize,
    seed: u64,
) -> Result<PairStats> {
    check_sides(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (na, nb) = (a.len(), b.len());
    let all = g.edges_between(a, b);
    let dens = Ratio::new(all as u64, (na * nb) as u64);
    let x_min = min_above_fraction(eps, na);
    let y_min = min_above_fraction(eps, nb);
    let mut best: Option<Candidate> = None;

    let mut consider = |x: VertexSet, y: VertexSet| {
        if x.len() < x_min || y.len() < y_min || x.len() > na || y.len() > nb {
            return;
        }
        let sub = g.edges_between(&x, &y);
        let (num, den) = deviation(sub, x.len(), y.len(), all, na, nb);
        if !exceeds(num, den, eps) {
            return;
        }
        let cand = Candidate {
            dev_num: num,
            dev_den: den,
            x,
            y,
        };
        if best
            .as_ref()
            .is_none_or(|b| cand.cmp_key(b) == Ordering::Greater)
        {
            best = Some(cand);
        }
    };

    if x_min <= na && y_min <= nb {
        let mut a_ids = a.to_vec();
        let mut b_ids = b.to_vec();

        // Neighbourhood splits around pivot edges.
        a_ids.shuffle(&mut rng);
        for &x0 in a_ids.iter().take(trials) {
            let nx = g.neighbors(x0).intersection(b);
            let mut nx_ids = nx.to_vec();
            if nx_ids.is_empty() {
                continue;
            }
            nx_ids.shuffle(&mut rng);
            let y0 = nx_ids[0];
            let ny = g.neighbors(y0).intersection(a);
            let mut x_in = ny.clone();
            x_in.remove(x0);
            let mut y_in = nx.clone();
            y_in.remove(y0);
            let mut x_out = a.difference(&ny);
            x_out.remove(x0);
            let mut y_out = b.difference(&nx);
            y_out.remove(y0);
            consider(x_in.clone(), y_in.clone());
            consider(x_out.clone(), y_out.clone());
            consider(x_in, y_out);
            consider(x_out, y_in);
        }

        // Held-out degree splits, both orientations.
        for flip in [false, true] {
            let (side, other, ids_other) = if flip {
                (b, a, &mut a_ids)
            } else {
                (a, b, &mut b_ids)
            };
            ids_other.sort_unstable();
            ids_other.shuffle(&mut rng);
            let half = ids_other.len() / 2;
            if half == 0 {
                continue;
            }
            let probe = VertexSet::from_iter(g.n(), ids_other[..half].iter().copied());
            let held = other.difference(&probe);
            let mut ranked: Vec<(usize, usize)> =
                side.iter().map(|v| (g.degree_into(v, &probe), v)).collect();
            ranked.sort_by(|l, r| r.0.cmp(&l.0).then(l.1.cmp(&r.1)));
            let take = side.len().div_ceil(2);
            let hi = VertexSet::from_iter(g.n(), ranked[..take].iter().map(|&(_, v)| v));
            let lo = VertexSet::from_iter(g.n(), ranked[ranked.len() - take..].iter().map(|&(_, v)| v));
            for part in [hi, lo] {
                if flip {
                    consider(held.clone(), part);
                } else {
                    consider(part, held.clone());
                }
            }
        }

        // Random subset pairs covering at least half of each side.
        a_ids.sort_unstable();
        b_ids.sort_unstable();
        let lo_a = x_min.max(na.div_ceil(2));
        let lo_b = y_min.max(nb.div_ceil(2));
        for _ in 0..trials {
            let xs = rng.random_range(lo_a..=na);
            let ys = rng.random_range(lo_b..=nb);
            let x = VertexSet::from_iter(g.n(), a_ids.choose_multiple(&mut rng, xs).copied());
            let y = VertexSet::from_iter(g.n(), b_ids.choose_multiple(&mut rng, ys).copied());
            consider(x, y);
        }
    }

    Ok(match best {
        None => PairStats {
            density: dens,
            verdict: Verdict::ProbablyRegular,
            witness: None,
        },
        Some(c) => PairStats {
            density: dens,
            verdict: Verdict::Irregular,
            witness: Some(c.into_witness()),
        },
    })
}

/// Dispatches to the exhaustive or sampled checker according to `params`.
pub fn check_pair(
    g: &DenseGraph,
    a: &VertexSet,
    b: &VertexSet,
    params: &RegularityParams,
    seed: u64,
) -> Result<PairStats> {
    let fits = a.len() <= params.exhaustive_cap && b.len() <= params.exhaustive_cap;
    match params.verdicts {
        VerdictMode::Exhaustive => {
            check_pair_exhaustive_capped(g, a, b, &params.epsilon, params.exhaustive_cap)
        }
        VerdictMode::Auto if fits => {
            check_pair_exhaustive_capped(g, a, b, &params.epsilon, params.exhaustive_cap)
        }
        _ => check_pair_sampled(g, a, b, &params.epsilon, params.sample_trials, seed),
    }
}

/// Index `q(P)` of a partition: `(1/k²) Σ_{s<t} Σ_{i,j} d²(V_i^(s), V_j^(t))`
/// in one color layer, or summed over all layers when `color` is `None`.
/// Exceptional classes are left out.
pub fn index(host: &PartiteHost, partition: &Partition, color: Option<usize>) -> Result<Index> {
    partition.validate(host)?;
    let layers: Vec<&DenseGraph> = match color {
        Some(c) => vec![host.layer(Some(c)).or_else(|e| {
            if host.colors().is_none() && c == 0 {
                Ok(host.graph())
            } else {
                Err(e)
            }
        })?],
        None => host.layers(),
    };
    let k = partition.k();
    let p = partition.p();
    let mut total = BigRational::zero();
    for g in layers {
        for s in 0..p {
            for t in s + 1..p {
                // Group e² sums by class-size pair so each group is one division.
                let mut groups: BTreeMap<(usize, usize), u128> = BTreeMap::new();
                for ci in partition.classes(s) {
                    for cj in partition.classes(t) {
                        let e = g.edges_between(ci, cj) as u128;
                        *groups.entry((ci.len(), cj.len())).or_default() += e * e;
                    }
                }
                for ((si, sj), sum) in groups {
                    let den = BigInt::from(si as u128 * si as u128) * BigInt::from(sj as u128 * sj as u128);
                    total += BigRational::new(BigInt::from(sum), den);
                }
            }
        }
    }
    let k2 = BigInt::from(k as u128 * k as u128);
    Ok(total / BigRational::from_integer(k2))
}

/// Checks `(1/s) Σ d_i² >= ((1/s) Σ d_i)² + t δ² / (s - t)` for
/// `(1/s) Σ_{i<=s} d_i = (1/t) Σ_{i<=t} d_i + δ`. Inputs whose δ disagrees
/// with the data by more than 1e-12 are rejected.
pub fn defect_cauchy_schwarz_check(d: &[BigRational], t: usize, delta: &BigRational) -> Result<bool> {
    let s = d.len();
    if t == 0 || s <= t {
        return Err(Error::arg(format!("need s > t >= 1, got s = {s}, t = {t}")));
    }
    let s_r = BigRational::from_integer(BigInt::from(s));
    let t_r = BigRational::from_integer(BigInt::from(t));
    let mean_s: BigRational = d.iter().cloned().sum::<BigRational>() / &s_r;
    let mean_t: BigRational = d[..t].iter().cloned().sum::<BigRational>() / &t_r;
    let tol = BigRational::new(BigInt::from(1), BigInt::from(10u64.pow(12)));
    if (&mean_s - &mean_t - delta).abs() > tol {
        return Err(Error::arg("delta does not match the data"));
    }
    let lhs: BigRational = d.iter().map(|x| x * x).sum::<BigRational>() / &s_r;
    let st = BigRational::from_integer(BigInt::from(s - t));
    let rhs = &mean_s * &mean_s + &t_r * delta * delta / st;
    Ok(lhs >= rhs)
}

/// Continuity of density under trimming: if `|X'| > (1-δ)|X|` and
/// `|Y'| > (1-δ)|Y|` then `|d(X',Y') - d(X,Y)| < 2δ` and
/// `|d²(X',Y') - d²(X,Y)| < 4δ`. Returns `None` when the hypotheses fail.
pub fn continuity_bounds_hold(
    g: &DenseGraph,
    x: &VertexSet,
    y: &VertexSet,
    x_sub: &VertexSet,
    y_sub: &VertexSet,
    delta: &Density,
) -> Result<Option<bool>> {
    if !x_sub.is_subset(x) || !y_sub.is_subset(y) {
        return Err(Error::arg("trimmed sets must be subsets"));
    }
    let keep = Ratio::from_integer(1) - *delta;
    let big = |sub: usize, whole: usize| Ratio::new(sub as u64, whole as u64) > keep;
    if delta > &Ratio::from_integer(1) || !big(x_sub.len(), x.len()) || !big(y_sub.len(), y.len()) {
        return Ok(None);
    }
    let d0 = density(g, x, y)?;
    let d1 = density(g, x_sub, y_sub)?;
    let diff = if d1 > d0 { d1 - d0 } else { d0 - d1 };
    let sq = |d: Density| d * d;
    let diff2 = if sq(d1) > sq(d0) { sq(d1) - sq(d0) } else { sq(d0) - sq(d1) };
    Ok(Some(diff < *delta * 2 && diff2 < *delta * 4))
}

/// Serialized pair verdict, one line per `(class, class, color)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRecord {
    pub s: usize,
    pub i: usize,
    pub t: usize,
    pub j: usize,
    pub color: usize,
    pub stats: PairStats,
}

impl PairRecord {
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "pair {} {} {} {} color={} d={} verdict={}",
            self.s,
            self.i,
            self.t,
            self.j,
            self.color,
            fmt_ratio(&self.stats.density),
            self.stats.verdict.code()
        );
        if let Some(w) = &self.stats.witness {
            line.push_str(&format!(" witnessX={} witnessY={}", w.x.to_hex(), w.y.to_hex()));
        }
        line
    }

    /// Parses a line produced by [`PairRecord::to_line`]. The witness
    /// deviation is recomputed from `g`.
    pub fn parse_line(line: &str, g: &DenseGraph) -> Result<PairRecord> {
        let bad = |m: &str| Error::arg(format!("bad pair line ({m}): {line:?}"));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 8 || f[0] != "pair" {
            return Err(bad("shape"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("index"));
        let kv = |s: &'static str, field: &str| -> Result<String> {
            field
                .strip_prefix(s)
                .map(str::to_owned)
                .ok_or_else(|| bad(s))
        };
        let color = num(&kv("color=", f[5])?)?;
        let dens = parse_ratio(&kv("d=", f[6])?)?;
        let verdict = Verdict::from_code(&kv("verdict=", f[7])?).ok_or_else(|| bad("verdict"))?;
        let witness = if f.len() == 10 {
            let x = VertexSet::from_hex(g.n(), &kv("witnessX=", f[8])?)?;
            let y = VertexSet::from_hex(g.n(), &kv("witnessY=", f[9])?)?;
            let sub = density(g, &x, &y)?;
            let deviation = if sub > dens { sub - dens } else { dens - sub };
            Some(Witness { x, y, deviation })
        } else if f.len() == 8 {
            None
        } else {
            return Err(bad("fields"));
        };
        Ok(PairRecord {
            s: num(f[1])?,
            i: num(f[2])?,
            t: num(f[3])?,
            j: num(f[4])?,
            color,
            stats: PairStats {
                density: dens,
                verdict,
                witness,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 8x8 pair made of two disjoint complete 4x4 blocks.
    pub(crate) fn block_pair() -> (DenseGraph, VertexSet, VertexSet) {
        let mut edges = Vec::new();
        for blk in 0..2 {
            for u in 0..4 {
                for v in 0..4 {
                    edges.push((blk * 4 + u, 8 + blk * 4 + v));
                }
            }
        }
        let g = DenseGraph::from_edges(16, edges).unwrap();
        (g, VertexSet::range(16, 0..8), VertexSet::range(16, 8..16))
    }

    fn complete_pair(na: usize, nb: usize) -> (DenseGraph, VertexSet, VertexSet) {
        let n = na + nb;
        let g = DenseGraph::from_edges(n, (0..na).flat_map(|u| (na..n).map(move |v| (u, v)))).unwrap();
        (g, VertexSet::range(n, 0..na), VertexSet::range(n, na..n))
    }

    /// Brute force over all subset pairs; returns the maximal deviation.
    fn brute_max_deviation(
        g: &DenseGraph,
        a: &VertexSet,
        b: &VertexSet,
        eps: &Density,
    ) -> Option<Density> {
        let a_ids = a.to_vec();
        let b_ids = b.to_vec();
        let whole = density(g, a, b).unwrap();
        let mut best: Option<Density> = None;
        for xm in 1u32..1 << a_ids.len() {
            let x = VertexSet::from_iter(g.n(), (0..a_ids.len()).filter(|i| xm >> i & 1 == 1).map(|i| a_ids[i]));
            if x.len() < min_above_fraction(eps, a.len()) {
                continue;
            }
            for ym in 1u32..1 << b_ids.len() {
                let y = VertexSet::from_iter(g.n(), (0..b_ids.len()).filter(|i| ym >> i & 1 == 1).map(|i| b_ids[i]));
                if y.len() < min_above_fraction(eps, b.len()) {
                    continue;
                }
                let d = density(g, &x, &y).unwrap();
                let dev = if d > whole { d - whole } else { whole - d };
                if dev > *eps && best.is_none_or(|b| dev > b) {
                    best = Some(dev);
                }
            }
        }
        best
    }

    #[test]
    fn complete_and_empty_pairs_are_regular() {
        let (g, a, b) = complete_pair(5, 6);
        for eps in [Ratio::new(1, 10), Ratio::new(1, 2)] {
            let st = check_pair_exhaustive(&g, &a, &b, &eps).unwrap();
            assert_eq!(st.verdict, Verdict::Regular);
            assert_eq!(st.density, Ratio::from_integer(1));
            let sp = check_pair_sampled(&g, &a, &b, &eps, 50, 1).unwrap();
            assert_eq!(sp.verdict, Verdict::ProbablyRegular);
        }
        let empty = DenseGraph::new(11);
        let st = check_pair_exhaustive(&empty, &a, &b, &Ratio::new(1, 5)).unwrap();
        assert_eq!(st.verdict, Verdict::Regular);
    }

    #[test]
    fn block_pair_has_aligned_half_witness() {
        let (g, a, b) = block_pair();
        let eps = Ratio::new(3, 10);
        let st = check_pair_exhaustive(&g, &a, &b, &eps).unwrap();
        assert_eq!(st.verdict, Verdict::Irregular);
        let w = st.witness.as_ref().unwrap();
        assert_eq!(w.x, VertexSet::range(16, 0..4));
        assert_eq!(w.y, VertexSet::range(16, 8..12));
        assert_eq!(w.deviation, Ratio::new(1, 2));
        assert_eq!(brute_max_deviation(&g, &a, &b, &eps), Some(Ratio::new(1, 2)));
        assert!(st.witness_is_valid(&g, &a, &b, &eps));
    }

    #[test]
    fn sampled_finds_block_witness_deterministically() {
        let (g, a, b) = block_pair();
        let eps = Ratio::new(3, 10);
        let st = check_pair_sampled(&g, &a, &b, &eps, 200, 9).unwrap();
        assert_eq!(st.verdict, Verdict::Irregular);
        assert!(st.witness_is_valid(&g, &a, &b, &eps));
        assert_eq!(st.witness.as_ref().unwrap().deviation, Ratio::new(1, 2));
        assert_eq!(check_pair_sampled(&g, &a, &b, &eps, 200, 9).unwrap(), st);
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        for seed in 0..40u64 {
            let na = 2 + (seed % 5) as usize;
            let nb = 2 + (seed / 5 % 5) as usize;
            let g = crate::graph::random_pair_graph(0..na, na..na + nb, 0.5, seed);
            let a = VertexSet::range(na + nb, 0..na);
            let b = VertexSet::range(na + nb, na..na + nb);
            for eps in [Ratio::new(1, 5), Ratio::new(1, 3), Ratio::new(1, 2)] {
                let st = check_pair_exhaustive(&g, &a, &b, &eps).unwrap();
                let brute = brute_max_deviation(&g, &a, &b, &eps);
                assert_eq!(st.witness.as_ref().map(|w| w.deviation), brute, "seed {seed}");
                assert!(st.witness_is_valid(&g, &a, &b, &eps));
            }
        }
    }

    #[test]
    fn exhaustive_refuses_large_sides() {
        let (g, a, b) = complete_pair(15, 3);
        let err = check_pair_exhaustive(&g, &a, &b, &Ratio::new(1, 4)).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn rejects_bad_sides() {
        let (g, a, _) = complete_pair(3, 3);
        assert!(check_pair_exhaustive(&g, &a, &a, &Ratio::new(1, 4)).is_err());
        assert!(check_pair_sampled(&g, &a, &VertexSet::empty(6), &Ratio::new(1, 4), 3, 0).is_err());
    }

    #[test]
    fn params_validate_epsilon() {
        assert!(RegularityParams::new(Ratio::new(1, 2)).is_ok());
        assert!(RegularityParams::new(Ratio::new(3, 5)).is_err());
        assert!(RegularityParams::new(Ratio::new(0, 1)).is_err());
    }

    #[test]
    fn defect_cs_examples() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        // d = (0, 1), t = 1: mean 1/2 = 0 + 1/2, equality 1/2 = 1/4 + 1/4.
        let d = [r(0, 1), r(1, 1)];
        assert!(defect_cauchy_schwarz_check(&d, 1, &r(1, 2)).unwrap());
        let lhs = r(1, 2);
        let rhs = r(1, 4) + r(1, 4);
        assert_eq!(lhs, rhs);
        // δ = 0 reduces to plain Cauchy-Schwarz.
        let d = [r(1, 3), r(2, 3), r(1, 3), r(2, 3)];
        assert!(defect_cauchy_schwarz_check(&d, 2, &r(0, 1)).unwrap());
        assert!(defect_cauchy_schwarz_check(&d, 2, &r(1, 7)).is_err());
        assert!(defect_cauchy_schwarz_check(&d, 4, &r(0, 1)).is_err());
    }

    #[test]
    fn pair_line_round_trip() {
        let (g, a, b) = block_pair();
        let stats = check_pair_exhaustive(&g, &a, &b, &Ratio::new(3, 10)).unwrap();
        let rec = PairRecord {
            s: 0,
            i: 1,
            t: 1,
            j: 1,
            color: 0,
            stats,
        };
        let line = rec.to_line();
        assert_eq!(line, "pair 0 1 1 1 color=0 d=1/2 verdict=I witnessX=f witnessY=f00");
        assert_eq!(PairRecord::parse_line(&line, &g).unwrap(), rec);
    }
}
