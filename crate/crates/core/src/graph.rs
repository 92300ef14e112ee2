//! Dense bit-adjacency graphs, vertex sets, and edge-colored multipartite hosts.

use std::fmt::Write as _;
use std::ops::Range;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ratio::Density;

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A subset of `0..universe` stored as a bitmask, with its cardinality cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet {
            universe,
            words: vec![0; words_for(universe)],
            len: 0,
        }
    }

    pub fn range(universe: usize, range: Range<usize>) -> Self {
        VertexSet::from_iter(universe, range)
    }

    /// Builds a set from vertex ids; ids outside the universe panic.
    pub fn from_iter(universe: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut set = VertexSet::empty(universe);
        for v in ids {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let w = &mut self.words[v / WORD];
        let bit = 1u64 << (v % WORD);
        let fresh = *w & bit == 0;
        *w |= bit;
        self.len += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe {
            return false;
        }
        let w = &mut self.words[v / WORD];
        let bit = 1u64 << (v % WORD);
        let present = *w & bit != 0;
        *w &= !bit;
        self.len -= present as usize;
        present
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    fn zip_with(&self, other: &VertexSet, op: impl Fn(u64, u64) -> u64) -> VertexSet {
        assert_eq!(self.universe, other.universe, "vertex sets over different universes");
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| op(a, b))
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        VertexSet {
            universe: self.universe,
            words,
            len,
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        popcount_and(&self.words, &other.words)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Big-endian hexadecimal rendering of the bitmask `sum 2^v`, lowercase,
    /// without leading zeros (`0` for the empty set).
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for &w in self.words.iter().rev() {
            if out.is_empty() {
                if w != 0 {
                    write!(out, "{w:x}").unwrap();
                }
            } else {
                write!(out, "{w:016x}").unwrap();
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn from_hex(universe: usize, hex: &str) -> Result<VertexSet> {
        let hex = hex.trim().trim_start_matches("0x");
        if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::arg(format!("bad hex bitmask {hex:?}")));
        }
        let mut set = VertexSet::empty(universe);
        for (pos, ch) in hex.bytes().rev().enumerate() {
            let nibble = (ch as char).to_digit(16).unwrap() as usize;
            for bit in 0..4 {
                if nibble >> bit & 1 == 1 {
                    let v = pos * 4 + bit;
                    if v >= universe {
                        return Err(Error::arg(format!(
                            "bitmask {hex} names vertex {v} outside 0..{universe}"
                        )));
                    }
                    set.insert(v);
                }
            }
        }
        Ok(set)
    }
}

fn popcount_and(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// Simple undirected graph on `0..n` backed by a symmetric bit matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseGraph {
    n: usize,
    stride: usize,
    rows: Vec<u64>,
    edges: usize,
}

impl std::fmt::Debug for DenseGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseGraph")
            .field("n", &self.n)
            .field("edges", &self.edge_list())
            .finish()
    }
}

impl DenseGraph {
    pub fn new(n: usize) -> Self {
        let stride = words_for(n).max(1);
        DenseGraph {
            n,
            stride,
            rows: vec![0; stride * n],
            edges: 0,
        }
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates, and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = DenseGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = DenseGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_edge(u, v);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::arg(format!("loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::arg(format!("edge {u}-{v} outside 0..{}", self.n)));
        }
        if self.has_edge(u, v) {
            return Err(Error::arg(format!("duplicate edge {u}-{v}")));
        }
        self.set_edge(u, v);
        Ok(())
    }

    fn set_edge(&mut self, u: usize, v: usize) {
        self.rows[u * self.stride + v / WORD] |= 1 << (v % WORD);
        self.rows[v * self.stride + u / WORD] |= 1 << (u % WORD);
        self.edges += 1;
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        self.rows[u * self.stride + v / WORD] &= !(1 << (v % WORD));
        self.rows[v * self.stride + u / WORD] &= !(1 << (u % WORD));
        self.edges -= 1;
        true
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.rows[u * self.stride + v / WORD] >> (v % WORD) & 1 == 1
    }

    /// Raw adjacency row of `v` (bit `w` set iff `v ~ w`).
    pub fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.stride..v * self.stride + words_for(self.n)]
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        let words = self.row(v).to_vec();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        VertexSet {
            universe: self.n,
            words,
            len,
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Number of neighbours of `v` inside `set`.
    pub fn degree_into(&self, v: usize, set: &VertexSet) -> usize {
        popcount_and(self.row(v), set.words())
    }

    /// `e(X, Y)`: edges with one end in `X` and the other in `Y`. Sets are
    /// expected to be disjoint.
    pub fn edges_between(&self, x: &VertexSet, y: &VertexSet) -> usize {
        x.iter().map(|v| self.degree_into(v, y)).sum()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edges);
        for u in 0..self.n {
            for v in self.neighbors(u).iter() {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.edges == self.n * self.n.saturating_sub(1) / 2
    }

    /// Induced subgraph on `vertices`, relabelled `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> DenseGraph {
        let mut g = DenseGraph::new(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set_edge(i, j);
                }
            }
        }
        g
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("graph {} {}\n", self.n, self.edges);
        for (u, v) in self.edge_list() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Parses the `graph <n> <m>` text format.
    pub fn parse(text: &str) -> Result<DenseGraph> {
        let mut lines = significant_lines(text);
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty graph file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "graph" {
            return Err(Error::parse(ln, "expected `graph <n> <m>`"));
        }
        let n = parse_field(ln, fields[1], "n")?;
        let m = parse_field(ln, fields[2], "m")?;
        let mut g = DenseGraph::new(n);
        let mut seen = 0;
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::parse(ln, "expected `<u> <v>`"));
            }
            let u = parse_field(ln, f[0], "u")?;
            let v = parse_field(ln, f[1], "v")?;
            if u >= v {
                return Err(Error::parse(ln, format!("edge {u} {v} must satisfy u < v")));
            }
            g.add_edge(u, v).map_err(|e| Error::parse(ln, e.to_string()))?;
            seen += 1;
        }
        if seen != m {
            return Err(Error::parse(ln, format!("header promises {m} edges, found {seen}")));
        }
        Ok(g)
    }
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field(line: usize, text: &str, what: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::parse(line, format!("bad {what}: {text:?}")))
}

/// `d(X, Y) = e(X, Y) / (|X| |Y|)` as an exact rational.
pub fn density(g: &DenseGraph, x: &VertexSet, y: &VertexSet) -> Result<Density> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::arg("density of an empty set"));
    }
    if !x.is_disjoint(y) {
        return Err(Error::arg("density of overlapping sets"));
    }
    let e = g.edges_between(x, y) as u64;
    Ok(Ratio::new(e, (x.len() * y.len()) as u64))
}

/// A `p`-partite graph whose parts are contiguous index ranges, optionally
/// carrying an `r`-edge-coloring stored as one layer per color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartiteHost {
    starts: Vec<usize>,
    graph: DenseGraph,
    layers: Option<Vec<DenseGraph>>,
}

impl PartiteHost {
    /// Wraps `graph` with the given part sizes. Edges inside a part are rejected.
    pub fn new(part_sizes: &[usize], graph: DenseGraph) -> Result<Self> {
        if part_sizes.len() < 2 {
            return Err(Error::arg("a partite host needs at least two parts"));
        }
        if part_sizes.contains(&0) {
            return Err(Error::arg("parts must be nonempty"));
        }
        let mut starts = Vec::with_capacity(part_sizes.len() + 1);
        let mut acc = 0;
        starts.push(0);
        for &s in part_sizes {
            acc += s;
            starts.push(acc);
        }
        if acc != graph.n() {
            return Err(Error::arg(format!(
                "part sizes sum to {acc} but graph has {} vertices",
                graph.n()
            )));
        }
        let host = PartiteHost {
            starts,
            graph,
            layers: None,
        };
        for (u, v) in host.graph.edge_list() {
            if host.part_of(u) == host.part_of(v) {
                return Err(Error::arg(format!("edge {u}-{v} lies inside a part")));
            }
        }
        Ok(host)
    }

    /// Builds a colored host from `(u, v, color)` triples.
    pub fn colored(
        part_sizes: &[usize],
        r: usize,
        edges: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        if r == 0 || r > u8::MAX as usize {
            return Err(Error::arg(format!("color count {r} out of range")));
        }
        let n: usize = part_sizes.iter().sum();
        let mut graph = DenseGraph::new(n);
        let mut layers = vec![DenseGraph::new(n); r];
        for (u, v, c) in edges {
            if c >= r {
                return Err(Error::arg(format!("edge {u}-{v} has color {c} >= r = {r}")));
            }
            graph.add_edge(u, v)?;
            layers[c].set_edge(u, v);
        }
        let mut host = PartiteHost::new(part_sizes, graph)?;
        host.layers = Some(layers);
        Ok(host)
    }

    pub fn p(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &DenseGraph {
        &self.graph
    }

    pub fn part_range(&self, s: usize) -> Range<usize> {
        self.starts[s]..self.starts[s + 1]
    }

    pub fn part_size(&self, s: usize) -> usize {
        self.starts[s + 1] - self.starts[s]
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        (0..self.p()).map(|s| self.part_size(s)).collect()
    }

    pub fn part_set(&self, s: usize) -> VertexSet {
        VertexSet::range(self.n(), self.part_range(s))
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.starts.partition_point(|&s| s <= v) - 1
    }

    /// Number of colors, or `None` for an uncolored host.
    pub fn colors(&self) -> Option<usize> {
        self.layers.as_ref().map(|l| l.len())
    }

    pub fn color_of(&self, u: usize, v: usize) -> Option<usize> {
        self.layers.as_ref()?.iter().position(|l| l.has_edge(u, v))
    }

    /// `true` when every cross-part pair is an edge.
    pub fn is_complete_partite(&self) -> bool {
        let n = self.n();
        let inside: usize = self.part_sizes().iter().map(|s| s * (s - 1) / 2).sum();
        self.graph.edge_count() == n * (n - 1) / 2 - inside
    }

    /// Graph layers the regularity machinery works on: one per color, or the
    /// host graph itself when uncolored.
    pub fn layers(&self) -> Vec<&DenseGraph> {
        match &self.layers {
            Some(layers) => layers.iter().collect(),
            None => vec![&self.graph],
        }
    }

    pub fn layer(&self, color: Option<usize>) -> Result<&DenseGraph> {
        match (color, &self.layers) {
            (None, _) => Ok(&self.graph),
            (Some(c), Some(layers)) => layers
                .get(c)
                .ok_or_else(|| Error::arg(format!("color {c} >= r = {}", layers.len()))),
            (Some(_), None) => Err(Error::State("host carries no edge coloring".into())),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let layers = self
            .layers
            .as_ref()
            .ok_or_else(|| Error::State("only colored hosts can be written".into()))?;
        let mut out = format!("partite {} {}", self.p(), layers.len());
        for s in self.part_sizes() {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
        for (u, v) in self.graph.edge_list() {
            let c = self.color_of(u, v).expect("colored edge");
            writeln!(out, "{u} {v} {c}").unwrap();
        }
        Ok(out)
    }

    /// Parses the `partite <p> <r> <s1> ... <sp>` text format.
    pub fn parse(text: &str) -> Result<PartiteHost> {
        let mut lines = significant_lines(text);
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty host file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 3 || fields[0] != "partite" {
            return Err(Error::parse(ln, "expected `partite <p> <r> <s1> ... <sp>`"));
        }
        let p = parse_field(ln, fields[1], "p")?;
        let r = parse_field(ln, fields[2], "r")?;
        if fields.len() != 3 + p {
            return Err(Error::parse(ln, format!("expected {p} part sizes")));
        }
        let sizes = fields[3..]
            .iter()
            .map(|f| parse_field(ln, f, "part size"))
            .collect::<Result<Vec<_>>>()?;
        let mut triples = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(ln, "expected `<u> <v> <c>`"));
            }
            let u = parse_field(ln, f[0], "u")?;
            let v = parse_field(ln, f[1], "v")?;
            let c = parse_field(ln, f[2], "color")?;
            if u >= v {
                return Err(Error::parse(ln, format!("edge {u} {v} must satisfy u < v")));
            }
            triples.push((ln, u, v, c));
        }
        // Validate edge by edge so errors carry the offending line.
        let n: usize = sizes.iter().sum();
        let probe = PartiteHost::new(&sizes, DenseGraph::new(n))
            .map_err(|e| Error::parse(1, e.to_string()))?;
        let mut seen = DenseGraph::new(n);
        for &(ln, u, v, c) in &triples {
            if c >= r {
                return Err(Error::parse(ln, format!("color {c} >= r = {r}")));
            }
            seen.add_edge(u, v).map_err(|e| Error::parse(ln, e.to_string()))?;
            if probe.part_of(u) == probe.part_of(v) {
                return Err(Error::parse(ln, format!("edge {u}-{v} lies inside a part")));
            }
        }
        PartiteHost::colored(&sizes, r, triples.into_iter().map(|(_, u, v, c)| (u, v, c)))
            .map_err(|e| Error::parse(1, e.to_string()))
    }
}

/// Graph on the host's vertex set holding exactly the edges of `color`.
pub fn monochrome_subgraph(host: &PartiteHost, color: usize) -> Result<DenseGraph> {
    host.layer(Some(color)).cloned()
}

/// Complete `p`-partite host with parts of `part_size` whose cross edges get
/// independent uniform colors from `0..r`. Deterministic in `seed`.
pub fn random_host(p: usize, part_size: usize, r: usize, seed: u64) -> Result<PartiteHost> {
    if p < 2 || part_size == 0 || r == 0 {
        return Err(Error::arg(format!(
            "random_host needs p >= 2, part_size >= 1, r >= 1 (got {p}, {part_size}, {r})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p * part_size;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if u / part_size != v / part_size {
                edges.push((u, v, rng.random_range(0..r)));
            }
        }
    }
    PartiteHost::colored(&vec![part_size; p], r, edges)
}

/// Random graph on `n` vertices with maximum degree at most `max_degree`:
/// candidate edges are visited in a seeded random order and kept while both
/// endpoints have spare degree.
pub fn random_bounded_degree_graph(n: usize, max_degree: usize, seed: u64) -> DenseGraph {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(&mut rng);
    let mut g = DenseGraph::new(n);
    for (u, v) in pairs {
        if g.degree(u) < max_degree && g.degree(v) < max_degree {
            g.set_edge(u, v);
        }
    }
    g
}

/// Random bipartite-style graph on `0..n` where each pair `(u, v)` with
/// `u` in `left` and `v` in `right` is an edge with probability `prob`.
pub fn random_pair_graph(
    left: Range<usize>,
    right: Range<usize>,
    prob: f64,
    seed: u64,
) -> DenseGraph {
    let n = left.end.max(right.end);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DenseGraph::new(n);
    for u in left {
        for v in right.clone() {
            if u != v && !g.has_edge(u, v) && rng.random_bool(prob) {
                g.set_edge(u, v);
            }
        }
    }
    g
}
