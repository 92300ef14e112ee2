//! The transversal Turán bound for complete multipartite cluster graphs, an
//! exhaustive oracle for it, and clique search in reduced graphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ratio::{fmt_ratio, parse_ratio, Density};

/// A cluster `(part, class)`, both 0-based.
pub type ClusterNode = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabel {
    /// Density of the pair in each color layer (one entry when uncolored).
    pub densities: Vec<Density>,
    /// Every color verdict was an exhaustive `Regular`, not a sampled one.
    pub certified: bool,
}

/// Graph on the clusters of a partition; edges join clusters of distinct parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedGraph {
    p: usize,
    k: usize,
    edges: BTreeMap<(ClusterNode, ClusterNode), EdgeLabel>,
}

fn ordered(a: ClusterNode, b: ClusterNode) -> (ClusterNode, ClusterNode) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ReducedGraph {
    pub fn new(p: usize, k: usize) -> ReducedGraph {
        ReducedGraph {
            p,
            k,
            edges: BTreeMap::new(),
        }
    }

    /// `K_p(k)` with every edge labeled density 1 in a single color.
    pub fn complete(p: usize, k: usize) -> ReducedGraph {
        let mut f = ReducedGraph::new(p, k);
        for s in 0..p {
            for t in s + 1..p {
                for i in 0..k {
                    for j in 0..k {
                        f.edges.insert(
                            ((s, i), (t, j)),
                            EdgeLabel {
                                densities: vec![Density::from_integer(1)],
                                certified: true,
                            },
                        );
                    }
                }
            }
        }
        f
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn insert_edge(&mut self, a: ClusterNode, b: ClusterNode, label: EdgeLabel) -> Result<()> {
        for &(s, i) in &[a, b] {
            if s >= self.p || i >= self.k {
                return Err(Error::arg(format!("cluster ({s}, {i}) out of range")));
            }
        }
        if a.0 == b.0 {
            return Err(Error::arg(format!("clusters {a:?} and {b:?} share a part")));
        }
        self.edges.insert(ordered(a, b), label);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: ClusterNode, b: ClusterNode) -> Option<EdgeLabel> {
        self.edges.remove(&ordered(a, b))
    }

    pub fn label(&self, a: ClusterNode, b: ClusterNode) -> Option<&EdgeLabel> {
        self.edges.get(&ordered(a, b))
    }

    pub fn has_edge(&self, a: ClusterNode, b: ClusterNode) -> bool {
        self.label(a, b).is_some()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (ClusterNode, ClusterNode, &EdgeLabel)> {
        self.edges.iter().map(|(&(a, b), l)| (a, b, l))
    }

    /// Text form: a `reduced p=<p> k=<k> edges=<m>` header, then one
    /// `edge <s> <i> <t> <j> certified=<bool> d=<r>,<r>,...` line per edge
    /// with 1-based class indices.
    pub fn to_text(&self) -> String {
        let mut out = format!("reduced p={} k={} edges={}\n", self.p, self.k, self.edges.len());
        for ((a, b), l) in &self.edges {
            let d: Vec<String> = l.densities.iter().map(fmt_ratio).collect();
            writeln!(
                out,
                "edge {} {} {} {} certified={} d={}",
                a.0,
                a.1 + 1,
                b.0,
                b.1 + 1,
                l.certified,
                d.join(",")
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<ReducedGraph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty reduced graph"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let field = |i: usize, key: &str| -> Result<usize> {
            h.get(i)
                .and_then(|f| f.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(ln, format!("expected {key}<int>")))
        };
        if h.len() != 4 || h[0] != "reduced" {
            return Err(Error::parse(ln, "expected `reduced p=<p> k=<k> edges=<m>`"));
        }
        let (p, k, m) = (field(1, "p=")?, field(2, "k=")?, field(3, "edges=")?);
        let mut f = ReducedGraph::new(p, k);
        for (ln, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 7 || t[0] != "edge" {
                return Err(Error::parse(
                    ln,
                    "expected `edge <s> <i> <t> <j> certified=<bool> d=<list>`",
                ));
            }
            let num = |x: &str| -> Result<usize> {
                x.parse().map_err(|_| Error::parse(ln, format!("bad index {x:?}")))
            };
            let (s, i, tt, j) = (num(t[1])?, num(t[2])?, num(t[3])?, num(t[4])?);
            if i == 0 || j == 0 {
                return Err(Error::parse(ln, "class indices start at 1"));
            }
            let certified = match t[5] {
                "certified=true" => true,
                "certified=false" => false,
                _ => return Err(Error::parse(ln, "expected certified=<bool>")),
            };
            let d = t[6]
                .strip_prefix("d=")
                .ok_or_else(|| Error::parse(ln, "expected d=<list>"))?;
            let densities = d
                .split(',')
                .map(|x| parse_ratio(x).map_err(|e| Error::parse(ln, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            f.insert_edge((s, i - 1), (tt, j - 1), EdgeLabel { densities, certified })
                .map_err(|e| Error::parse(ln, e.to_string()))?;
        }
        if f.edge_count() != m {
            return Err(Error::parse(ln, format!("header says {m} edges, found {}", f.edge_count())));
        }
        Ok(f)
    }
}

/// `t_p(k) = (C(p,2) - 1) k²`, the largest number of edges of a subgraph of
/// `K_p(k)` without a transversal `K_p`. Returns 0 for `p < 2`.
pub fn turan_bound(p: u64, k: u64) -> u64 {
    (p * p.saturating_sub(1) / 2).saturating_sub(1) * k * k
}

/// Largest edge count of a `K_p`-free subgraph of `K_p(k)`, by exhaustive
/// branch and bound over the cross edges. Independent of [`turan_bound`].
pub fn max_kp_free_oracle(p: usize, k: usize) -> Result<u64> {
    if p < 2 || k < 1 {
        return Err(Error::arg(format!("oracle needs p >= 2 and k >= 1, got ({p}, {k})")));
    }
    let cross = p * (p - 1) / 2 * k * k;
    if cross > 24 {
        return Err(Error::Capacity(format!(
            "K_{p}({k}) has {cross} cross edges; the oracle handles at most 24"
        )));
    }
    let node = |s: usize, i: usize| s * k + i;
    let mut edges = Vec::with_capacity(cross);
    for s in 0..p {
        for t in s + 1..p {
            for i in 0..k {
                for j in 0..k {
                    edges.push((node(s, i), node(t, j)));
                }
            }
        }
    }
    let part_masks: Vec<u64> = (0..p).map(|s| ((1u64 << k) - 1) << (s * k)).collect();
    let mut search = Oracle {
        edges,
        part_masks,
        k,
        adj: vec![0; p * k],
        best: 0,
    };
    search.run(0, 0);
    Ok(search.best)
}

struct Oracle {
    edges: Vec<(usize, usize)>,
    part_masks: Vec<u64>,
    k: usize,
    adj: Vec<u64>,
    best: u64,
}

impl Oracle {
    fn run(&mut self, at: usize, taken: u64) {
        if taken > self.best {
            self.best = taken;
        }
        if at == self.edges.len() || taken + (self.edges.len() - at) as u64 <= self.best {
            return;
        }
        let (a, b) = self.edges[at];
        if !self.closes_clique(a, b) {
            self.adj[a] |= 1 << b;
            self.adj[b] |= 1 << a;
            self.run(at + 1, taken + 1);
            self.adj[a] &= !(1 << b);
            self.adj[b] &= !(1 << a);
        }
        self.run(at + 1, taken);
    }

    /// Would adding `ab` create a transversal `K_p` through it?
    fn closes_clique(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (a / self.k, b / self.k);
        let rest: Vec<u64> = self
            .part_masks
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != pa && s != pb)
            .map(|(_, &m)| m)
            .collect();
        extend(&self.adj, &rest, self.adj[a] & self.adj[b])
    }
}

fn extend(adj: &[u64], parts: &[u64], common: u64) -> bool {
    let Some((&mask, rest)) = parts.split_first() else {
        return true;
    };
    let mut cand = common & mask;
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if extend(adj, rest, common & adj[v]) {
            return true;
        }
    }
    false
}

/// `K_p(k)` minus every edge between parts 0 and 1.
pub fn extremal_construction(p: usize, k: usize) -> ReducedGraph {
    let mut f = ReducedGraph::complete(p, k);
    for i in 0..k {
        for j in 0..k {
            f.remove_edge((0, i), (1, j));
        }
    }
    f
}

/// First transversal clique (one cluster per part, pairwise adjacent under
/// `filter`) in lexicographic order of cluster choices.
pub fn find_cluster_clique<F>(f: &ReducedGraph, filter: F) -> Option<Vec<ClusterNode>>
where
    F: Fn(ClusterNode, ClusterNode, &EdgeLabel) -> bool,
{
    cluster_cliques(f, filter, 1).into_iter().next()
}

/// Up to `limit` transversal cliques in lexicographic order.
pub fn cluster_cliques<F>(f: &ReducedGraph, filter: F, limit: usize) -> Vec<Vec<ClusterNode>>
where
    F: Fn(ClusterNode, ClusterNode, &EdgeLabel) -> bool,
{
    let ok = |a: ClusterNode, b: ClusterNode| f.label(a, b).is_some_and(|l| filter(a, b, l));
    let mut out = Vec::new();
    let mut chosen: Vec<ClusterNode> = Vec::with_capacity(f.p);
    fn go(
        f: &ReducedGraph,
        ok: &dyn Fn(ClusterNode, ClusterNode) -> bool,
        chosen: &mut Vec<ClusterNode>,
        out: &mut Vec<Vec<ClusterNode>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let s = chosen.len();
        if s == f.p {
            out.push(chosen.clone());
            return;
        }
        for i in 0..f.k {
            let v = (s, i);
            if chosen.iter().all(|&u| ok(u, v)) {
                chosen.push(v);
                go(f, ok, chosen, out, limit);
                chosen.pop();
                if out.len() >= limit {
                    return;
                }
            }
        }
    }
    if f.p > 0 && limit > 0 {
        go(f, &ok, &mut chosen, &mut out, limit);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bound_examples() {
        assert_eq!(turan_bound(2, 5), 0);
        assert_eq!(turan_bound(3, 2), 8);
        assert_eq!(turan_bound(4, 1), 5);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(max_kp_free_oracle(3, 1).unwrap(), 2);
        assert_eq!(max_kp_free_oracle(3, 2).unwrap(), 8);
        assert_eq!(max_kp_free_oracle(2, 3).unwrap(), 0);
        assert!(matches!(max_kp_free_oracle(5, 2), Err(Error::Capacity(_))));
        assert!(matches!(max_kp_free_oracle(3, 3), Err(Error::Capacity(_))));
    }

    #[test]
    fn extremal_examples() {
        let f = extremal_construction(3, 2);
        assert_eq!(f.edge_count(), 8);
        assert!(find_cluster_clique(&f, |_, _, _| true).is_none());
        assert_eq!(extremal_construction(2, 3).edge_count(), 0);
        let f = extremal_construction(4, 1);
        assert_eq!(f.edge_count(), 5);
        assert!(find_cluster_clique(&f, |_, _, _| true).is_none());
    }

    #[test]
    fn complete_graph_gives_first_clusters() {
        let f = ReducedGraph::complete(4, 3);
        assert_eq!(
            find_cluster_clique(&f, |_, _, _| true),
            Some(vec![(0, 0), (1, 0), (2, 0), (3, 0)])
        );
        assert_eq!(cluster_cliques(&f, |_, _, _| true, 100).len(), 81);
    }

    #[test]
    fn dense_random_reduced_graphs_contain_cliques() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (p, k) = (rng.random_range(2..6), rng.random_range(1..5));
            let mut f = ReducedGraph::complete(p, k);
            let all: Vec<_> = f.edges().map(|(a, b, _)| (a, b)).collect();
            // Drop fewer than k² edges, leaving more than t_p(k).
            for _ in 0..rng.random_range(0..k * k) {
                let (a, b) = all[rng.random_range(0..all.len())];
                f.remove_edge(a, b);
            }
            assert!(f.edge_count() as u64 > turan_bound(p as u64, k as u64));
            let clique = find_cluster_clique(&f, |_, _, _| true).expect("dense graph");
            assert_eq!(clique.len(), p);
            for (x, &a) in clique.iter().enumerate() {
                assert_eq!(a.0, x);
                for &b in &clique[x + 1..] {
                    assert!(f.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn filter_is_respected() {
        let f = ReducedGraph::complete(3, 2);
        let clique = find_cluster_clique(&f, |a, b, _| a.1 + b.1 > 0).unwrap();
        assert_eq!(clique, vec![(0, 0), (1, 1), (2, 1)]);
    }

    #[test]
    fn text_round_trip() {
        let mut f = extremal_construction(3, 2);
        f.insert_edge(
            (1, 0),
            (2, 1),
            EdgeLabel {
                densities: vec![Density::new(1, 3), Density::new(2, 3)],
                certified: false,
            },
        )
        .unwrap();
        let text = f.to_text();
        assert!(text.contains("edge 1 1 2 2 certified=false d=1/3,2/3\n"));
        assert_eq!(ReducedGraph::parse(&text).unwrap(), f);
        assert!(matches!(
            ReducedGraph::parse("reduced p=2 k=1 edges=1\nedge 0 1 0 1 certified=true d=1/1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
