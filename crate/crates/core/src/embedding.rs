//! Greedy embedding of a bounded-degree graph into a tuple of clusters.
//!
//! Each target vertex `u_i` owns a target set `Y_i` inside the cluster of its
//! color `φ(i)`. Vertices are placed in ascending order; a candidate image
//! must keep enough neighbours in the target set of every later neighbour.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DenseGraph, VertexSet};
use crate::ratio::{density_to_index, fmt_index, Density, Index};

/// Graph to embed together with a proper coloring into `delta` classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetGraph {
    pub graph: DenseGraph,
    pub delta: usize,
    /// 0-based color of each vertex; vertex `i` is placed in cluster `phi[i]`.
    pub phi: Vec<usize>,
}

impl TargetGraph {
    /// Colors `graph` with [`proper_coloring`].
    pub fn new(graph: DenseGraph, delta: usize) -> Result<TargetGraph> {
        let phi = proper_coloring(&graph, delta)?;
        Ok(TargetGraph { graph, delta, phi })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn check_phi(&self) -> Result<()> {
        if self.phi.len() != self.graph.n() {
            return Err(Error::State(format!(
                "coloring covers {} of {} vertices",
                self.phi.len(),
                self.graph.n()
            )));
        }
        if let Some(&c) = self.phi.iter().find(|&&c| c >= self.delta.max(1)) {
            return Err(Error::State(format!("color {c} outside 0..{}", self.delta)));
        }
        for (u, v) in self.graph.edge_list() {
            if self.phi[u] == self.phi[v] {
                return Err(Error::State(format!("coloring is improper on edge {u}-{v}")));
            }
        }
        Ok(())
    }
}

/// Proper coloring with at most `delta` colors by exact backtracking
/// (ascending vertices, lowest color first).
pub fn proper_coloring(g: &DenseGraph, delta: usize) -> Result<Vec<usize>> {
    let n = g.n();
    if g.max_degree() > delta {
        return Err(Error::arg(format!(
            "maximum degree {} exceeds delta = {delta}",
            g.max_degree()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut colors = vec![usize::MAX; n];
    if delta > 0 && color_from(g, delta, 0, &mut colors) {
        return Ok(colors);
    }
    if g.edge_count() == 0 {
        colors.iter_mut().for_each(|c| *c = 0);
        return Ok(colors);
    }
    Err(Error::Infeasible(obstruction(g, delta)))
}

fn color_from(g: &DenseGraph, delta: usize, v: usize, colors: &mut [usize]) -> bool {
    if v == g.n() {
        return true;
    }
    for c in 0..delta {
        if g.neighbors(v).iter().all(|u| colors[u] != c) {
            colors[v] = c;
            if color_from(g, delta, v + 1, colors) {
                return true;
            }
        }
    }
    colors[v] = usize::MAX;
    false
}

fn components(g: &DenseGraph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut at = 0;
        while at < comp.len() {
            for u in g.neighbors(comp[at]).iter() {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
            at += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn obstruction(g: &DenseGraph, delta: usize) -> String {
    for comp in components(g) {
        let sub = g.induced(&comp);
        if comp.len() == delta + 1 && sub.is_complete() {
            return format!("no proper {delta}-coloring: complete graph K_{} on {comp:?}", delta + 1);
        }
        let is_cycle = comp.len() >= 3 && (0..sub.n()).all(|v| sub.degree(v) == 2);
        if delta == 2 && is_cycle && comp.len() % 2 == 1 {
            return format!("no proper 2-coloring: odd cycle on {comp:?}");
        }
    }
    format!("no proper {delta}-coloring exists")
}

/// Vertices of `a` with at least `(d - eps)|y|` neighbours in `y`.
pub fn good_vertex_set(
    g: &DenseGraph,
    a: &VertexSet,
    y: &VertexSet,
    d: &Density,
    eps: &Density,
) -> VertexSet {
    // deg >= (d - eps)|Y|  <=>  deg * den_d * den_e >= (num_d den_e - num_e den_d) |Y|
    let (dn, dd) = (*d.numer() as i128, *d.denom() as i128);
    let (en, ed) = (*eps.numer() as i128, *eps.denom() as i128);
    let need = (dn * ed - en * dd) * y.len() as i128;
    let scale = dd * ed;
    let mut out = VertexSet::empty(a.universe());
    for v in a.iter() {
        if g.degree_into(v, y) as i128 * scale >= need {
            out.insert(v);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Choice {
    /// Lowest-index candidate.
    #[default]
    Lowest,
    /// Uniform candidate from a seeded stream.
    Random(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmbedOptions {
    pub choice: Choice,
    /// Cluster pairs were certified regular exhaustively: violations of the
    /// per-step size bound become errors instead of ledger entries.
    pub certified: bool,
}

/// Size bookkeeping for one placement step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    /// Neighbours of `u_i` placed before it.
    pub d1: usize,
    /// Neighbours of `u_i` placed after it.
    pub d2: usize,
    pub initial: usize,
    pub before: usize,
    pub candidates: usize,
    /// `(1 - d2 ε)(d_floor - ε)^d1 |Y_i^0|`.
    pub bound: Index,
    pub holds: bool,
}

impl StepRecord {
    pub fn to_line(&self) -> String {
        format!(
            "step {} d1={} d2={} initial={} before={} candidates={} bound={} holds={}",
            self.step,
            self.d1,
            self.d2,
            self.initial,
            self.before,
            self.candidates,
            fmt_index(&self.bound),
            self.holds
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingState {
    pub clusters: Vec<VertexSet>,
    pub phi: Vec<usize>,
    pub target_sets: Vec<VertexSet>,
    pub images: Vec<Option<usize>>,
    pub step: usize,
    pub ledger: Vec<StepRecord>,
    /// How often each target set was cut down to a neighbourhood.
    pub restrictions: Vec<usize>,
}

impl EmbeddingState {
    /// `cluster <c>: <ids>` lines, then `map <u> -> <v> cluster <c>` lines,
    /// clusters numbered from 1.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, set) in self.clusters.iter().enumerate() {
            write!(out, "cluster {}:", c + 1).unwrap();
            for v in set.iter() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        for (u, img) in self.images.iter().enumerate() {
            if let Some(v) = img {
                writeln!(out, "map {u} -> {v} cluster {}", self.phi[u] + 1).unwrap();
            }
        }
        out
    }

    /// Reads the text form back; `universe` is the host order. Lines other
    /// than `cluster` and `map` are ignored so reports can be parsed too.
    pub fn parse(text: &str, universe: usize) -> Result<EmbeddingState> {
        let mut clusters: Vec<VertexSet> = Vec::new();
        let mut maps: Vec<(usize, usize, usize)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("cluster ") {
                let (c, ids) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(ln, "expected `cluster <c>: <ids>`"))?;
                let c: usize = c.trim().parse().map_err(|_| Error::parse(ln, "bad cluster index"))?;
                if c != clusters.len() + 1 {
                    return Err(Error::parse(ln, format!("cluster {c} out of order")));
                }
                let mut set = VertexSet::empty(universe);
                for tok in ids.split_whitespace() {
                    let v: usize = tok
                        .parse()
                        .map_err(|_| Error::parse(ln, format!("bad vertex {tok:?}")))?;
                    if v >= universe {
                        return Err(Error::parse(ln, format!("vertex {v} outside 0..{universe}")));
                    }
                    set.insert(v);
                }
                clusters.push(set);
            } else if let Some(rest) = line.strip_prefix("map ") {
                let t: Vec<&str> = rest.split_whitespace().collect();
                if t.len() != 5 || t[1] != "->" || t[3] != "cluster" {
                    return Err(Error::parse(ln, "expected `map <u> -> <v> cluster <c>`"));
                }
                let num = |x: &str| -> Result<usize> {
                    x.parse().map_err(|_| Error::parse(ln, format!("bad number {x:?}")))
                };
                let (u, v, c) = (num(t[0])?, num(t[2])?, num(t[4])?);
                if c == 0 {
                    return Err(Error::parse(ln, "clusters are numbered from 1"));
                }
                if v >= universe {
                    return Err(Error::parse(ln, format!("vertex {v} outside 0..{universe}")));
                }
                if u != maps.len() {
                    return Err(Error::parse(ln, format!("map for {u} out of order")));
                }
                maps.push((u, v, c - 1));
            }
        }
        let n = maps.len();
        Ok(EmbeddingState {
            clusters,
            phi: maps.iter().map(|m| m.2).collect(),
            target_sets: vec![VertexSet::empty(universe); n],
            images: maps.iter().map(|m| Some(m.1)).collect(),
            step: n,
            ledger: Vec::new(),
            restrictions: vec![0; n],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureTrace {
    pub step: usize,
    /// Target set sizes when the step starved, one per target vertex.
    pub target_sizes: Vec<usize>,
    pub ledger: Vec<StepRecord>,
}

impl FailureTrace {
    pub fn to_line(&self) -> String {
        let sizes: Vec<String> = self.target_sizes.iter().map(usize::to_string).collect();
        format!("fail step={} candidates=0 targets={}", self.step, sizes.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedOutcome {
    Success(EmbeddingState),
    Failure(FailureTrace),
}

fn step_bound(d1: usize, d2: usize, initial: usize, eps: &Index, d_floor: &Index) -> Index {
    let first = BigRational::one() - eps * BigRational::from_integer(BigInt::from(d2));
    let base = d_floor - eps;
    if first.is_negative() || base.is_negative() && d1 > 0 {
        return BigRational::zero();
    }
    let pow = (0..d1).fold(BigRational::one(), |acc, _| acc * &base);
    first * pow * BigRational::from_integer(BigInt::from(initial))
}

/// Places `u_0, u_1, ...` in order into the clusters `clusters[phi[i]]` of `g`.
///
/// The candidate set for `u_i` is its target set restricted, for every later
/// neighbour `u_j`, to vertices with at least `(d_floor - eps)|Y_j|`
/// neighbours in `Y_j`. After choosing `v_i` each later neighbour's target
/// set shrinks to its intersection with `N(v_i)`, and `v_i` is removed from
/// every target set in its cluster.
pub fn embed(
    target: &TargetGraph,
    g: &DenseGraph,
    clusters: &[VertexSet],
    eps: &Density,
    d_floor: &Density,
    opts: EmbedOptions,
) -> Result<EmbedOutcome> {
    target.check_phi()?;
    let n = target.n();
    if let Some(&c) = target.phi.iter().find(|&&c| c >= clusters.len()) {
        return Err(Error::arg(format!(
            "coloring uses cluster {} but only {} clusters were given",
            c + 1,
            clusters.len()
        )));
    }
    for (a, ca) in clusters.iter().enumerate() {
        if ca.universe() != g.n() {
            return Err(Error::arg(format!("cluster {} is not over the host vertices", a + 1)));
        }
        for (b, cb) in clusters.iter().enumerate().skip(a + 1) {
            if !ca.is_disjoint(cb) {
                return Err(Error::arg(format!("clusters {} and {} overlap", a + 1, b + 1)));
            }
        }
    }
    let eps_q = density_to_index(eps);
    let floor_q = density_to_index(d_floor);
    let mut rng = match opts.choice {
        Choice::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Choice::Lowest => None,
    };
    let mut targets: Vec<VertexSet> = target.phi.iter().map(|&c| clusters[c].clone()).collect();
    let initial: Vec<usize> = targets.iter().map(VertexSet::len).collect();
    let mut images: Vec<Option<usize>> = vec![None; n];
    let mut restrictions = vec![0usize; n];
    let mut ledger = Vec::with_capacity(n);

    for i in 0..n {
        let nbrs = target.graph.neighbors(i);
        let future: Vec<usize> = nbrs.iter().filter(|&j| j > i).collect();
        let d1 = nbrs.len() - future.len();
        let mut cand = targets[i].clone();
        for &j in &future {
            cand = cand.intersection(&good_vertex_set(g, &targets[i], &targets[j], d_floor, eps));
        }
        let bound = step_bound(d1, future.len(), initial[i], &eps_q, &floor_q);
        let count = BigRational::from_integer(BigInt::from(cand.len()));
        let record = StepRecord {
            step: i,
            d1,
            d2: future.len(),
            initial: initial[i],
            before: targets[i].len(),
            candidates: cand.len(),
            holds: count >= bound,
            bound,
        };
        if opts.certified && !record.holds {
            return Err(Error::Diagnostic(format!(
                "step {i}: {} candidates below the bound {}",
                record.candidates,
                fmt_index(&record.bound)
            )));
        }
        ledger.push(record);
        let chosen = match rng.as_mut() {
            None => cand.first(),
            Some(rng) => cand.to_vec().choose(rng).copied(),
        };
        let Some(v) = chosen else {
            return Ok(EmbedOutcome::Failure(FailureTrace {
                step: i,
                target_sizes: targets.iter().map(VertexSet::len).collect(),
                ledger,
            }));
        };
        images[i] = Some(v);
        let hood = g.neighbors(v);
        for &j in &future {
            targets[j] = targets[j].intersection(&hood);
            restrictions[j] += 1;
        }
        for j in i + 1..n {
            if target.phi[j] == target.phi[i] {
                targets[j].remove(v);
            }
        }
    }
    debug_assert!(restrictions.iter().all(|&r| r <= target.delta));
    Ok(EmbedOutcome::Success(EmbeddingState {
        clusters: clusters.to_vec(),
        phi: target.phi.clone(),
        target_sets: targets,
        images,
        step: n,
        ledger,
        restrictions,
    }))
}

/// Re-checks an embedding from raw adjacency: every image chosen and
/// distinct, inside the cluster of its color, and every edge of the target
/// mapped onto an edge of `g`.
pub fn verify_embedding(target: &DenseGraph, state: &EmbeddingState, g: &DenseGraph) -> Result<bool> {
    let n = target.n();
    if state.images.len() != n || state.phi.len() != n {
        return Err(Error::arg(format!(
            "embedding covers {} of {n} target vertices",
            state.images.len()
        )));
    }
    let images: Vec<usize> = state
        .images
        .iter()
        .enumerate()
        .map(|(u, img)| img.ok_or_else(|| Error::arg(format!("vertex {u} has no image"))))
        .collect::<Result<_>>()?;
    let mut seen = VertexSet::empty(g.n());
    for (u, &v) in images.iter().enumerate() {
        if v >= g.n() || !seen.insert(v) {
            return Ok(false);
        }
        match state.clusters.get(state.phi[u]) {
            Some(c) if c.contains(v) => {}
            _ => return Ok(false),
        }
    }
    Ok(target
        .edge_list()
        .into_iter()
        .all(|(a, b)| g.has_edge(images[a], images[b])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_bounded_degree_graph;

    fn complete_clusters(delta: usize, size: usize) -> (DenseGraph, Vec<VertexSet>) {
        let n = delta * size;
        let mut g = DenseGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if u / size != v / size {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        let clusters = (0..delta).map(|c| VertexSet::range(n, c * size..(c + 1) * size)).collect();
        (g, clusters)
    }

    fn half() -> Density {
        Density::new(1, 2)
    }

    #[test]
    fn coloring_examples() {
        let p4 = DenseGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(proper_coloring(&p4, 2).unwrap(), vec![0, 1, 0, 1]);
        let err = proper_coloring(&DenseGraph::complete(4), 3).unwrap_err();
        assert!(matches!(&err, Error::Infeasible(m) if m.contains("K_4")), "{err}");
        let c5 = DenseGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let err = proper_coloring(&c5, 2).unwrap_err();
        assert!(matches!(&err, Error::Infeasible(m) if m.contains("odd cycle")), "{err}");
        for seed in 0..50 {
            let g = random_bounded_degree_graph(8, 3, seed);
            let phi = proper_coloring(&g, 3).unwrap();
            assert!(phi.iter().all(|&c| c < 3));
            for (u, v) in g.edge_list() {
                assert_ne!(phi[u], phi[v]);
            }
        }
    }

    #[test]
    fn good_vertex_examples() {
        let (g, cl) = complete_clusters(2, 4);
        assert_eq!(good_vertex_set(&g, &cl[0], &cl[1], &half(), &Density::new(1, 10)), cl[0]);
        let empty = DenseGraph::new(8);
        let zero = Density::from_integer(0);
        assert_eq!(good_vertex_set(&empty, &cl[0], &cl[1], &zero, &Density::new(1, 10)), cl[0]);
        assert!(good_vertex_set(&empty, &cl[0], &cl[1], &half(), &Density::new(1, 10)).is_empty());
    }

    #[test]
    fn triangle_into_complete_clusters() {
        let (g, cl) = complete_clusters(3, 5);
        let t = TargetGraph::new(DenseGraph::complete(3), 3).unwrap();
        let EmbedOutcome::Success(st) = embed(&t, &g, &cl, &Density::new(1, 10), &half(), EmbedOptions::default()).unwrap()
        else {
            panic!("triangle must embed");
        };
        assert_eq!(st.images, vec![Some(0), Some(5), Some(10)]);
        assert!(verify_embedding(&t.graph, &st, &g).unwrap());
        assert!(st.ledger.iter().all(|r| r.holds));
        assert!(st.restrictions.iter().all(|&r| r <= 3));
    }

    #[test]
    fn edgeless_clusters_fail_at_first_constrained_step() {
        let g = DenseGraph::new(10);
        let cl = vec![VertexSet::range(10, 0..5), VertexSet::range(10, 5..10)];
        let t = TargetGraph::new(DenseGraph::from_edges(3, [(1, 2)]).unwrap(), 2).unwrap();
        let out = embed(&t, &g, &cl, &Density::new(1, 10), &half(), EmbedOptions::default()).unwrap();
        let EmbedOutcome::Failure(trace) = out else {
            panic!("expected failure");
        };
        assert_eq!(trace.step, 1);
        assert_eq!(trace.to_line(), "fail step=1 candidates=0 targets=5,4,5");
    }

    #[test]
    fn improper_coloring_is_a_state_error() {
        let (g, cl) = complete_clusters(2, 3);
        let t = TargetGraph {
            graph: DenseGraph::complete(2),
            delta: 2,
            phi: vec![0, 0],
        };
        let err = embed(&t, &g, &cl, &Density::new(1, 10), &half(), EmbedOptions::default()).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn verify_catches_perturbation_and_incompleteness() {
        let (mut g, cl) = complete_clusters(3, 5);
        let t = TargetGraph::new(DenseGraph::complete(3), 3).unwrap();
        let EmbedOutcome::Success(mut st) =
            embed(&t, &g, &cl, &Density::new(1, 10), &half(), EmbedOptions::default()).unwrap()
        else {
            panic!()
        };
        g.remove_edge(0, 6);
        st.images[1] = Some(6);
        assert!(!verify_embedding(&t.graph, &st, &g).unwrap());
        st.images[1] = None;
        assert!(verify_embedding(&t.graph, &st, &g).is_err());

        let one = DenseGraph::new(1);
        let single = EmbeddingState {
            clusters: vec![VertexSet::from_iter(4, [2])],
            phi: vec![0],
            target_sets: vec![],
            images: vec![Some(2)],
            step: 1,
            ledger: vec![],
            restrictions: vec![0],
        };
        assert!(verify_embedding(&one, &single, &DenseGraph::new(4)).unwrap());
    }

    #[test]
    fn text_round_trip_and_seeded_choice() {
        let (g, cl) = complete_clusters(3, 6);
        let t = TargetGraph::new(random_bounded_degree_graph(6, 2, 3), 3).unwrap();
        let opts = EmbedOptions {
            choice: Choice::Random(9),
            certified: false,
        };
        let a = embed(&t, &g, &cl, &Density::new(1, 10), &half(), opts).unwrap();
        let b = embed(&t, &g, &cl, &Density::new(1, 10), &half(), opts).unwrap();
        assert_eq!(a, b);
        let EmbedOutcome::Success(st) = a else { panic!() };
        let back = EmbeddingState::parse(&st.to_text(), g.n()).unwrap();
        assert_eq!(back.images, st.images);
        assert_eq!(back.clusters, st.clusters);
        assert!(verify_embedding(&t.graph, &back, &g).unwrap());
    }
}
