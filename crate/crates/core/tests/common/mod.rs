//! Independent oracles shared by the integration tests. They work from raw
//! adjacency (`has_edge`, `color_of`) and plain integer or rational
//! arithmetic, never through the library's own counting helpers.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;

use folkreg::graph::{DenseGraph, PartiteHost, VertexSet};
use folkreg::partition::Partition;
use folkreg::ratio::Density;

pub fn edges_between(g: &DenseGraph, xs: &[usize], ys: &[usize]) -> u64 {
    let mut e = 0;
    for &x in xs {
        for &y in ys {
            if g.has_edge(x, y) {
                e += 1;
            }
        }
    }
    e
}

/// `e(X, Y) / (|X||Y|)` as `(num, den)`, unreduced.
pub fn density(g: &DenseGraph, xs: &[usize], ys: &[usize]) -> (u64, u64) {
    (edges_between(g, xs, ys), (xs.len() * ys.len()) as u64)
}

fn rat(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Whether an edge `uv` of the host lies in `color` (uncolored hosts: color 0 is the graph).
pub fn in_layer(host: &PartiteHost, color: usize, u: usize, v: usize) -> bool {
    if !host.graph().has_edge(u, v) {
        return false;
    }
    match host.colors() {
        None => color == 0,
        Some(_) => host.color_of(u, v) == Some(color),
    }
}

/// Index summed over `colors`: `(1/k²) Σ_{s<t} Σ_{i,j} d²`.
pub fn index(host: &PartiteHost, p: &Partition, colors: &[usize]) -> BigRational {
    let k = p.k();
    let mut total = BigRational::from_integer(BigInt::from(0));
    for &c in colors {
        for s in 0..p.p() {
            for t in s + 1..p.p() {
                for x in p.classes(s) {
                    for y in p.classes(t) {
                        let (xs, ys) = (x.to_vec(), y.to_vec());
                        let mut e = 0u64;
                        for &u in &xs {
                            for &v in &ys {
                                if in_layer(host, c, u, v) {
                                    e += 1;
                                }
                            }
                        }
                        let d = rat(e, (xs.len() * ys.len()) as u64);
                        total += &d * &d;
                    }
                }
            }
        }
    }
    total / BigRational::from_integer(BigInt::from(k * k))
}

/// `|a/b - c/d| > eps` exactly.
pub fn deviates(sub: (u64, u64), whole: (u64, u64), eps: &Density) -> bool {
    let (a, b) = (sub.0 as i128, sub.1 as i128);
    let (c, d) = (whole.0 as i128, whole.1 as i128);
    let diff = (a * d - c * b).abs();
    // diff / (b d) > en / ed
    diff * (*eps.denom() as i128) > (*eps.numer() as i128) * b * d
}

/// `size > eps * total` exactly.
pub fn above_fraction(size: usize, eps: &Density, total: usize) -> bool {
    (size as u128) * (*eps.denom() as u128) > (*eps.numer() as u128) * (total as u128)
}

/// Re-derives a witness: subsets, sizes strictly above the ε-fractions, and
/// density deviation strictly above ε.
pub fn witness_valid(g: &DenseGraph, a: &VertexSet, b: &VertexSet, x: &VertexSet, y: &VertexSet, eps: &Density) -> bool {
    if !x.is_subset(a) || !y.is_subset(b) {
        return false;
    }
    if !above_fraction(x.len(), eps, a.len()) || !above_fraction(y.len(), eps, b.len()) {
        return false;
    }
    let whole = density(g, &a.to_vec(), &b.to_vec());
    let sub = density(g, &x.to_vec(), &y.to_vec());
    deviates(sub, whole, eps)
}

/// ε-regularity by enumerating every pair of subsets. Sides must be small.
pub fn brute_regular(g: &DenseGraph, a: &[usize], b: &[usize], eps: &Density) -> bool {
    assert!(a.len() <= 8 && b.len() <= 8, "brute force is for tiny sides");
    let whole = density(g, a, b);
    for xm in 1u32..(1 << a.len()) {
        let xs: Vec<usize> = (0..a.len()).filter(|i| xm >> i & 1 == 1).map(|i| a[i]).collect();
        if !above_fraction(xs.len(), eps, a.len()) {
            continue;
        }
        for ym in 1u32..(1 << b.len()) {
            let ys: Vec<usize> = (0..b.len()).filter(|i| ym >> i & 1 == 1).map(|i| b[i]).collect();
            if !above_fraction(ys.len(), eps, b.len()) {
                continue;
            }
            if deviates(density(g, &xs, &ys), whole, eps) {
                return false;
            }
        }
    }
    true
}

/// Largest `K_p`-free subgraph of `K_p(k)` by plain enumeration of all edge
/// subsets (no pruning). Only for tiny instances.
pub fn turan_brute(p: usize, k: usize) -> u64 {
    let mut edges = Vec::new();
    for s in 0..p {
        for t in s + 1..p {
            for i in 0..k {
                for j in 0..k {
                    edges.push((s * k + i, t * k + j));
                }
            }
        }
    }
    assert!(edges.len() <= 16, "plain enumeration is for tiny instances");
    // Every transversal: one cluster index per part.
    let mut transversals = Vec::new();
    let mut pick = vec![0usize; p];
    loop {
        transversals.push(pick.iter().enumerate().map(|(s, &i)| s * k + i).collect::<Vec<_>>());
        let mut at = 0;
        while at < p && pick[at] == k - 1 {
            pick[at] = 0;
            at += 1;
        }
        if at == p {
            break;
        }
        pick[at] += 1;
    }
    let mut best = 0;
    for mask in 0u32..(1 << edges.len()) {
        let has = |a: usize, b: usize| {
            edges
                .iter()
                .position(|&e| e == (a.min(b), a.max(b)))
                .is_some_and(|i| mask >> i & 1 == 1)
        };
        let has_clique = transversals.iter().any(|t| {
            t.iter()
                .enumerate()
                .all(|(x, &a)| t[x + 1..].iter().all(|&b| has(a, b)))
        });
        if !has_clique {
            best = best.max(mask.count_ones() as u64);
        }
    }
    best
}

/// Does the pair coloring of `K_n` (`color[x][y]`) contain a monochromatic triangle?
pub fn has_mono_triangle(n: usize, color: &dyn Fn(usize, usize) -> usize) -> bool {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if color(a, b) == color(a, c) && color(a, b) == color(b, c) {
                    return true;
                }
            }
        }
    }
    false
}

/// Embedding check from raw host adjacency and colors.
pub fn embedding_valid(
    host: &PartiteHost,
    color: usize,
    target: &DenseGraph,
    images: &[usize],
    clusters: &[VertexSet],
    phi: &[usize],
) -> bool {
    if images.len() != target.n() {
        return false;
    }
    for (u, &v) in images.iter().enumerate() {
        if images[..u].contains(&v) || !clusters[phi[u]].contains(v) {
            return false;
        }
    }
    for u in 0..target.n() {
        for w in u + 1..target.n() {
            if target.has_edge(u, w) && !in_layer(host, color, images[u], images[w]) {
                return false;
            }
        }
    }
    true
}
