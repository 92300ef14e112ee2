//! Equitable multipartite partitions and the energy-increment refinement loop.
//!
//! A [`Partition`] assigns every part of a [`PartiteHost`] the same number `k`
//! of classes. In the with-exceptional style all classes of a part have equal
//! size and leftovers sit in an exceptional class; in the near-equitable style
//! class sizes within a part differ by at most one and nothing is left over.
//!
//! [`iterate_to_regular`] alternates pair assessment and [`refine_step`] until
//! few enough pairs are irregular. Each refinement splits every class along
//! the atoms cut out by irregularity witnesses, in every color at once, so the
//! same partition serves all color layers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{PartiteHost, VertexSet};
use crate::ratio::{density_to_index, fmt_index, fmt_ratio, parse_index, parse_ratio, Density, Index};
use crate::regularity::{check_pair, index, PairRecord, PairStats, RefineMode, RegularityParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    WithExceptional,
    NearEquitable,
}

impl Style {
    fn tag(self) -> &'static str {
        match self {
            Style::WithExceptional => "exc",
            Style::NearEquitable => "near",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct PartClasses {
    exceptional: VertexSet,
    classes: Vec<VertexSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<PartClasses>,
    k: usize,
    style: Style,
}

impl Partition {
    /// Assembles a partition from per-part `(exceptional, classes)` and checks
    /// it against `host`.
    pub fn new(
        host: &PartiteHost,
        parts: Vec<(VertexSet, Vec<VertexSet>)>,
        style: Style,
    ) -> Result<Partition> {
        let k = parts.first().map_or(0, |(_, c)| c.len());
        let partition = Partition {
            parts: parts
                .into_iter()
                .map(|(exceptional, classes)| PartClasses {
                    exceptional,
                    classes,
                })
                .collect(),
            k,
            style,
        };
        partition.validate(host)?;
        Ok(partition)
    }

    pub fn p(&self) -> usize {
        self.parts.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn style(&self) -> Style {
        self.style
    }

    /// Non-exceptional classes of part `s`, 0-based.
    pub fn classes(&self, s: usize) -> &[VertexSet] {
        &self.parts[s].classes
    }

    pub fn class(&self, s: usize, i: usize) -> &VertexSet {
        &self.parts[s].classes[i]
    }

    pub fn exceptional(&self, s: usize) -> &VertexSet {
        &self.parts[s].exceptional
    }

    pub fn class_sizes(&self, s: usize) -> Vec<usize> {
        self.parts[s].classes.iter().map(VertexSet::len).collect()
    }

    /// Checks disjointness, coverage, common `k`, and the style's size rule.
    pub fn validate(&self, host: &PartiteHost) -> Result<()> {
        if self.parts.len() != host.p() {
            return Err(Error::arg(format!(
                "partition has {} parts, host has {}",
                self.parts.len(),
                host.p()
            )));
        }
        if self.k == 0 {
            return Err(Error::arg("partition needs at least one class per part"));
        }
        for (s, part) in self.parts.iter().enumerate() {
            if part.classes.len() != self.k {
                return Err(Error::arg(format!(
                    "part {s} has {} classes, expected k = {}",
                    part.classes.len(),
                    self.k
                )));
            }
            let whole = host.part_set(s);
            let mut covered = part.exceptional.clone();
            if part.exceptional.universe() != host.n() || !part.exceptional.is_subset(&whole) {
                return Err(Error::arg(format!("exceptional class of part {s} leaves the part")));
            }
            if self.style == Style::NearEquitable && !part.exceptional.is_empty() {
                return Err(Error::arg(format!(
                    "near-equitable partition has a nonempty exceptional class in part {s}"
                )));
            }
            for (i, c) in part.classes.iter().enumerate() {
                if c.universe() != host.n() || !c.is_subset(&whole) {
                    return Err(Error::arg(format!("class {} of part {s} leaves the part", i + 1)));
                }
                if c.is_empty() {
                    return Err(Error::arg(format!("class {} of part {s} is empty", i + 1)));
                }
                if !c.is_disjoint(&covered) {
                    return Err(Error::arg(format!("class {} of part {s} overlaps another", i + 1)));
                }
                covered = covered.union(c);
            }
            if covered.len() != whole.len() {
                return Err(Error::arg(format!("classes of part {s} do not cover it")));
            }
            let sizes = self.class_sizes(s);
            let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
            let ok = match self.style {
                Style::WithExceptional => lo == hi,
                Style::NearEquitable => hi - lo <= 1,
            };
            if !ok {
                return Err(Error::arg(format!(
                    "part {s} class sizes {lo}..{hi} violate the {} size rule",
                    self.style.tag()
                )));
            }
        }
        Ok(())
    }

    /// Renders the partition file format.
    pub fn to_text(&self, epsilon: &Density, q: &Index) -> String {
        let mut out = format!(
            "partition p={} k={} style={} epsilon={} q={}\n",
            self.p(),
            self.k,
            self.style.tag(),
            fmt_ratio(epsilon),
            fmt_index(q)
        );
        for (s, part) in self.parts.iter().enumerate() {
            if self.style == Style::WithExceptional {
                write_class(&mut out, s, 0, &part.exceptional);
            }
            for (i, c) in part.classes.iter().enumerate() {
                write_class(&mut out, s, i + 1, c);
            }
        }
        out
    }

    /// Parses the partition file format, returning the partition with the
    /// recorded ε and index.
    pub fn parse(text: &str, host: &PartiteHost) -> Result<(Partition, Density, Index)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty partition file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "partition" {
            return Err(Error::parse(
                ln,
                "expected `partition p=<p> k=<k> style=<exc|near> epsilon=<r> q=<r>`",
            ));
        }
        let get = |i: usize, key: &str| {
            fields[i]
                .strip_prefix(key)
                .ok_or_else(|| Error::parse(ln, format!("expected {key}")))
        };
        let p: usize = get(1, "p=")?
            .parse()
            .map_err(|_| Error::parse(ln, "bad p"))?;
        let k: usize = get(2, "k=")?
            .parse()
            .map_err(|_| Error::parse(ln, "bad k"))?;
        let style = match get(3, "style=")? {
            "exc" => Style::WithExceptional,
            "near" => Style::NearEquitable,
            other => return Err(Error::parse(ln, format!("unknown style {other:?}"))),
        };
        let eps = parse_ratio(get(4, "epsilon=")?).map_err(|e| Error::parse(ln, e.to_string()))?;
        let q = parse_index(get(5, "q=")?).map_err(|e| Error::parse(ln, e.to_string()))?;
        if p != host.p() {
            return Err(Error::parse(ln, format!("p={p} but host has {} parts", host.p())));
        }
        let n = host.n();
        let mut parts: Vec<(VertexSet, Vec<Option<VertexSet>>)> =
            (0..p).map(|_| (VertexSet::empty(n), vec![None; k])).collect();
        for (ln, line) in lines {
            let (head, ids) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(ln, "expected `part <s> class <i>: <ids>`"))?;
            let h: Vec<&str> = head.split_whitespace().collect();
            if h.len() != 4 || h[0] != "part" || h[2] != "class" {
                return Err(Error::parse(ln, "expected `part <s> class <i>: <ids>`"));
            }
            let s: usize = h[1].parse().map_err(|_| Error::parse(ln, "bad part index"))?;
            let i: usize = h[3].parse().map_err(|_| Error::parse(ln, "bad class index"))?;
            if s >= p || i > k {
                return Err(Error::parse(ln, format!("class ({s}, {i}) out of range")));
            }
            let mut set = VertexSet::empty(n);
            for tok in ids.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(ln, format!("bad vertex {tok:?}")))?;
                if v >= n {
                    return Err(Error::parse(ln, format!("vertex {v} outside 0..{n}")));
                }
                set.insert(v);
            }
            if i == 0 {
                if style == Style::NearEquitable {
                    return Err(Error::parse(ln, "near-equitable partitions have no class 0"));
                }
                parts[s].0 = set;
            } else {
                if parts[s].1[i - 1].is_some() {
                    return Err(Error::parse(ln, format!("class ({s}, {i}) listed twice")));
                }
                parts[s].1[i - 1] = Some(set);
            }
        }
        let mut assembled = Vec::with_capacity(p);
        for (s, (exc, classes)) in parts.into_iter().enumerate() {
            let classes = classes
                .into_iter()
                .enumerate()
                .map(|(i, c)| {
                    c.ok_or_else(|| Error::parse(ln, format!("class ({s}, {}) missing", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            assembled.push((exc, classes));
        }
        let partition =
            Partition::new(host, assembled, style).map_err(|e| Error::parse(ln, e.to_string()))?;
        Ok((partition, eps, q))
    }
}

fn write_class(out: &mut String, s: usize, i: usize, set: &VertexSet) {
    write!(out, "part {s} class {i}:").unwrap();
    for v in set.iter() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

/// Splits every part into `m` equal consecutive classes; the remainder
/// (fewer than `m` vertices) forms the exceptional class.
pub fn initial_partition(host: &PartiteHost, m: usize) -> Result<Partition> {
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    let n = host.n();
    let mut parts = Vec::with_capacity(host.p());
    for s in 0..host.p() {
        let range = host.part_range(s);
        let size = range.len();
        if size < m {
            return Err(Error::arg(format!("part {s} has {size} < m = {m} vertices")));
        }
        let c = size / m;
        let classes = (0..m)
            .map(|i| VertexSet::range(n, range.start + i * c..range.start + (i + 1) * c))
            .collect();
        let exceptional = VertexSet::range(n, range.start + m * c..range.end);
        parts.push((exceptional, classes));
    }
    Partition::new(host, parts, Style::WithExceptional)
}

/// Identifies one class pair in one color layer. Parts satisfy `s < t`;
/// class indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub s: usize,
    pub i: usize,
    pub t: usize,
    pub j: usize,
    pub color: usize,
}

/// Verdicts for every cross pair of a partition in the assessed colors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairTable {
    pub colors: Vec<usize>,
    pub stats: BTreeMap<PairKey, PairStats>,
}

impl PairTable {
    pub fn get(&self, key: &PairKey) -> Option<&PairStats> {
        self.stats.get(key)
    }

    pub fn irregular_count(&self) -> usize {
        self.stats.values().filter(|s| s.verdict.is_irregular()).count()
    }

    /// Text lines in the pair-record format, with 1-based class indices.
    pub fn to_lines(&self) -> Vec<String> {
        self.stats
            .iter()
            .map(|(k, st)| {
                PairRecord {
                    s: k.s,
                    i: k.i + 1,
                    t: k.t,
                    j: k.j + 1,
                    color: k.color,
                    stats: st.clone(),
                }
                .to_line()
            })
            .collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn pair_seed(seed: u64, k: usize, key: &PairKey) -> u64 {
    [k, key.s, key.i, key.t, key.j, key.color]
        .iter()
        .fold(splitmix(seed), |acc, &x| splitmix(acc ^ x as u64))
}

/// Layer ids used for a host: `0..r` when colored, `[0]` (the graph) otherwise.
pub fn all_colors(host: &PartiteHost) -> Vec<usize> {
    (0..host.colors().unwrap_or(1)).collect()
}

/// Computes a verdict for every cross class pair in every listed color. Pairs
/// are checked in parallel; each pair's sampling seed depends only on
/// `params.seed`, `k`, and the pair key, so results are reproducible.
pub fn assess_pairs(
    host: &PartiteHost,
    partition: &Partition,
    params: &RegularityParams,
    colors: &[usize],
) -> Result<PairTable> {
    let layers = host.layers();
    for &c in colors {
        if c >= layers.len() {
            return Err(Error::arg(format!("color {c} >= {}", layers.len())));
        }
    }
    let k = partition.k();
    let mut keys = Vec::new();
    for &color in colors {
        for s in 0..partition.p() {
            for t in s + 1..partition.p() {
                for i in 0..k {
                    for j in 0..k {
                        keys.push(PairKey { s, i, t, j, color });
                    }
                }
            }
        }
    }
    let stats = keys
        .par_iter()
        .map(|key| {
            let g = layers[key.color];
            let st = check_pair(
                g,
                partition.class(key.s, key.i),
                partition.class(key.t, key.j),
                params,
                pair_seed(params.seed, k, key),
            )?;
            Ok((*key, st))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(PairTable {
        colors: colors.to_vec(),
        stats,
    })
}

/// Index of `partition` summed over `colors`, plus the per-color values.
pub fn color_indices(
    host: &PartiteHost,
    partition: &Partition,
    colors: &[usize],
) -> Result<(Index, Vec<Index>)> {
    let per: Vec<Index> = colors
        .iter()
        .map(|&c| index(host, partition, Some(c)))
        .collect::<Result<_>>()?;
    let total = per.iter().cloned().fold(BigRational::zero(), |a, b| a + b);
    Ok((total, per))
}

/// Outcome of one refinement round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundReport {
    pub k_before: usize,
    pub k_after: usize,
    pub irregular: usize,
    pub q_before: Index,
    pub q_after: Index,
    pub q_before_per_color: Vec<Index>,
    pub q_after_per_color: Vec<Index>,
    /// No irregular pair was present; the partition is returned unchanged.
    pub regular: bool,
    /// Practical mode found no admissible split that keeps the index from
    /// dropping; the partition is returned unchanged.
    pub stalled: bool,
    pub exceptional_growth: Vec<usize>,
}

/// Atoms of a class: vertices grouped by which witness sets contain them,
/// groups ordered by smallest member.
fn atoms(class: &VertexSet, cutters: &[&VertexSet]) -> Vec<Vec<usize>> {
    let mut groups: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in class.iter() {
        let mut sig = vec![0u64; cutters.len().div_ceil(64)];
        for (w, set) in cutters.iter().enumerate() {
            if set.contains(v) {
                sig[w / 64] |= 1 << (w % 64);
            }
        }
        let slot = *groups.entry(sig).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[slot].push(v);
    }
    out
}

/// Witness sets cutting each class, pooled over colors: `cutters[s][i]`.
fn collect_cutters<'a>(partition: &Partition, table: &'a PairTable) -> Vec<Vec<Vec<&'a VertexSet>>> {
    let mut cutters: Vec<Vec<Vec<&VertexSet>>> =
        (0..partition.p()).map(|_| vec![Vec::new(); partition.k()]).collect();
    for (key, st) in &table.stats {
        if let Some(w) = &st.witness {
            if st.verdict.is_irregular() {
                cutters[key.s][key.i].push(&w.x);
                cutters[key.t][key.j].push(&w.y);
            }
        }
    }
    cutters
}

fn check_table(partition: &Partition, table: &PairTable, colors: &[usize]) -> Result<()> {
    let k = partition.k();
    for &color in colors {
        for s in 0..partition.p() {
            for t in s + 1..partition.p() {
                for i in 0..k {
                    for j in 0..k {
                        if table.get(&PairKey { s, i, t, j, color }).is_none() {
                            return Err(Error::State(format!(
                                "no verdict for pair ({s},{}) ({t},{}) in color {color}",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Cuts `order` (a class listed atom by atom) into `chunks` pieces of `size`;
/// whatever is left goes to `spill`.
fn chunk_class(
    n: usize,
    order: &[usize],
    chunks: usize,
    size: usize,
    spill: &mut VertexSet,
) -> Vec<VertexSet> {
    let out = (0..chunks)
        .map(|h| VertexSet::from_iter(n, order[h * size..(h + 1) * size].iter().copied()))
        .collect();
    for &v in &order[chunks * size..] {
        spill.insert(v);
    }
    out
}

/// One energy-increment refinement.
///
/// Every class is split into atoms by the witness sets of the irregular pairs
/// it belongs to (all colors pooled). Practical mode lists each class atom by
/// atom and cuts it into a common number `h >= 2` of equal chunks, trying the
/// preferred `h` first and accepting the first choice whose summed index does
/// not drop; leftovers join the exceptional class. Faithful mode keeps exactly
/// `4^k - 2^k` chunks of size `floor(c / 4^k)` carved out of atoms.
pub fn refine_step(
    host: &PartiteHost,
    partition: &Partition,
    table: &PairTable,
    params: &RegularityParams,
    colors: &[usize],
) -> Result<(Partition, RoundReport)> {
    params.validate()?;
    if partition.style() != Style::WithExceptional {
        return Err(Error::arg("refine_step needs a with-exceptional partition"));
    }
    check_table(partition, table, colors)?;
    let (q_before, q_before_per_color) = color_indices(host, partition, colors)?;
    let irregular = table
        .stats
        .iter()
        .filter(|(k, st)| colors.contains(&k.color) && st.verdict.is_irregular())
        .count();
    let k = partition.k();
    let unchanged = |regular: bool, stalled: bool| RoundReport {
        k_before: k,
        k_after: k,
        irregular,
        q_before: q_before.clone(),
        q_after: q_before.clone(),
        q_before_per_color: q_before_per_color.clone(),
        q_after_per_color: q_before_per_color.clone(),
        regular,
        stalled,
        exceptional_growth: vec![0; partition.p()],
    };
    if irregular == 0 {
        return Ok((partition.clone(), unchanged(true, false)));
    }

    let cutters = collect_cutters(partition, table);
    let class_atoms: Vec<Vec<Vec<Vec<usize>>>> = (0..partition.p())
        .map(|s| {
            partition
                .classes(s)
                .iter()
                .zip(&cutters[s])
                .map(|(c, cut)| atoms(c, cut))
                .collect()
        })
        .collect();

    let candidate = match params.mode {
        RefineMode::Practical => {
            practical_split(host, partition, &class_atoms, params, colors, &q_before)?
        }
        RefineMode::Faithful => Some(faithful_split(host, partition, &class_atoms, params)?),
    };
    let Some(refined) = candidate else {
        return Ok((partition.clone(), unchanged(false, true)));
    };

    for s in 0..refined.p() {
        for c in refined.classes(s) {
            if !partition.classes(s).iter().any(|old| c.is_subset(old)) {
                return Err(Error::Diagnostic(format!(
                    "refined class in part {s} straddles old classes"
                )));
            }
        }
        if !partition.exceptional(s).is_subset(refined.exceptional(s)) {
            return Err(Error::Diagnostic(format!("exceptional class of part {s} shrank")));
        }
    }
    let (q_after, q_after_per_color) = color_indices(host, &refined, colors)?;
    let exceptional_growth: Vec<usize> = (0..refined.p())
        .map(|s| refined.exceptional(s).len() - partition.exceptional(s).len())
        .collect();

    if q_after < q_before {
        return Err(Error::Diagnostic(format!(
            "index dropped from {} to {}",
            fmt_index(&q_before),
            fmt_index(&q_after)
        )));
    }
    if params.mode == RefineMode::Faithful {
        let eps = density_to_index(&params.epsilon);
        let eps5 = (0..5).fold(BigRational::one(), |acc, _| acc * &eps);
        let two_k = BigRational::from_integer(BigInt::from(2u32).pow(k as u32));
        let sixteen = BigRational::from_integer(BigInt::from(16));
        if two_k * &eps5 >= sixteen {
            let gain = eps5 / BigRational::from_integer(BigInt::from(4));
            if q_after < &q_before + gain {
                return Err(Error::Diagnostic("index gain below eps^5/4".into()));
            }
        }
    }

    Ok((
        refined.clone(),
        RoundReport {
            k_before: k,
            k_after: refined.k(),
            irregular,
            q_before,
            q_after,
            q_before_per_color,
            q_after_per_color,
            regular: false,
            stalled: false,
            exceptional_growth,
        },
    ))
}

fn practical_split(
    host: &PartiteHost,
    partition: &Partition,
    class_atoms: &[Vec<Vec<Vec<usize>>>],
    params: &RegularityParams,
    colors: &[usize],
    q_before: &Index,
) -> Result<Option<Partition>> {
    let n = host.n();
    let sizes: Vec<usize> = (0..partition.p()).map(|s| partition.class(s, 0).len()).collect();
    let h_max = sizes
        .iter()
        .map(|&c| c / params.class_size_floor)
        .min()
        .unwrap_or(0);
    if h_max < 2 {
        return Ok(None);
    }
    let most_atoms = class_atoms
        .iter()
        .flatten()
        .map(Vec::len)
        .max()
        .unwrap_or(1);
    let preferred = params.split.unwrap_or(most_atoms).clamp(2, h_max);
    let candidates = std::iter::once(preferred)
        .chain((2..preferred).rev())
        .chain(preferred + 1..=h_max);
    for h in candidates {
        let mut parts = Vec::with_capacity(partition.p());
        for s in 0..partition.p() {
            let mut spill = partition.exceptional(s).clone();
            let size = sizes[s] / h;
            let mut classes = Vec::with_capacity(partition.k() * h);
            for atoms in &class_atoms[s] {
                let order: Vec<usize> = atoms.iter().flatten().copied().collect();
                classes.extend(chunk_class(n, &order, h, size, &mut spill));
            }
            parts.push((spill, classes));
        }
        let refined = Partition::new(host, parts, Style::WithExceptional)?;
        let (q, _) = color_indices(host, &refined, colors)?;
        if q >= *q_before {
            return Ok(Some(refined));
        }
    }
    Ok(None)
}

fn faithful_split(
    host: &PartiteHost,
    partition: &Partition,
    class_atoms: &[Vec<Vec<Vec<usize>>>],
    params: &RegularityParams,
) -> Result<Partition> {
    let k = partition.k();
    if k >= 20 {
        return Err(Error::Precondition(format!(
            "faithful refinement with k = {k} needs classes of 2^{} vertices",
            3 * k
        )));
    }
    let four_k = 1usize << (2 * k);
    let chunks = four_k - (1 << k);
    let n = host.n();
    let mut parts = Vec::with_capacity(partition.p());
    for s in 0..partition.p() {
        let c = partition.class(s, 0).len();
        if c < 1 << (3 * k) {
            return Err(Error::Precondition(format!(
                "faithful refinement needs class size >= 2^(3k) = {}, part {s} has {c}",
                1usize << (3 * k)
            )));
        }
        let d = c / four_k;
        let mut spill = partition.exceptional(s).clone();
        let mut classes = Vec::with_capacity(k * chunks);
        for (i, atoms) in class_atoms[s].iter().enumerate() {
            // Whole d-chunks carved from each atom, in atom order.
            let mut pieces: Vec<&[usize]> = Vec::new();
            for atom in atoms {
                pieces.extend(atom.chunks_exact(d));
            }
            if pieces.len() < chunks {
                return Err(Error::Diagnostic(format!(
                    "class {} of part {s}: only {} chunks of size {d} from {} atoms, need {chunks}",
                    i + 1,
                    pieces.len(),
                    atoms.len()
                )));
            }
            let kept: Vec<&[usize]> = pieces[..chunks].to_vec();
            let mut taken = VertexSet::empty(n);
            for piece in &kept {
                let set = VertexSet::from_iter(n, piece.iter().copied());
                taken = taken.union(&set);
                classes.push(set);
            }
            for v in partition.class(s, i).difference(&taken).iter() {
                spill.insert(v);
            }
        }
        let growth = spill.len() - partition.exceptional(s).len();
        let bound = host.part_size(s) as f64 / (1u64 << (k - 1)) as f64;
        if growth as f64 > bound {
            return Err(Error::Diagnostic(format!(
                "exceptional class of part {s} grew by {growth} > n/2^(k-1) = {bound}"
            )));
        }
        parts.push((spill, classes));
    }
    let _ = params;
    Partition::new(host, parts, Style::WithExceptional)
}

/// History of an [`iterate_to_regular`] run. Entry `i` of the histories
/// describes the `i`-th partition visited (entry 0 is the initial one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport {
    pub rounds: usize,
    pub q_history: Vec<Index>,
    pub q_history_per_color: Vec<Vec<Index>>,
    pub irregular_history: Vec<usize>,
    pub k_history: Vec<usize>,
    pub final_k: usize,
    pub regular: bool,
    pub stalled: bool,
    /// Which visited partition was returned.
    pub chosen: usize,
}

impl RefinementReport {
    pub fn to_lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "refinement rounds={} final_k={} regular={} stalled={} chosen={}",
            self.rounds, self.final_k, self.regular, self.stalled, self.chosen
        )];
        for (i, q) in self.q_history.iter().enumerate() {
            let per: Vec<String> = self.q_history_per_color[i].iter().map(fmt_index).collect();
            out.push(format!(
                "round {i} k={} irregular={} q={} q_colors={}",
                self.k_history[i],
                self.irregular_history[i],
                fmt_index(q),
                per.join(",")
            ));
        }
        out
    }
}

/// `irregular <= eps * k^2 * r * C(p, 2)`, exactly.
pub fn within_irregular_budget(irregular: usize, eps: &Density, k: usize, r: usize, p: usize) -> bool {
    let total = (k * k * r * (p * (p - 1) / 2)) as u128;
    (irregular as u128) * (*eps.denom() as u128) <= (*eps.numer() as u128) * total
}

/// Refines from `initial_partition(host, m)` until the number of irregular
/// pairs (all colors together) is within `ε k² r C(p,2)`, the refinement
/// stalls, or `max_rounds` refinements have run.
///
/// When the target is missed the visited partition with the smallest share of
/// irregular pairs is returned (earliest on ties) with `regular = false`.
pub fn iterate_to_regular(
    host: &PartiteHost,
    params: &RegularityParams,
    colors: &[usize],
) -> Result<(Partition, PairTable, RefinementReport)> {
    params.validate()?;
    let r = colors.len();
    let p = host.p();
    let mut current = initial_partition(host, params.min_classes)?;
    let mut visited: Vec<(Partition, PairTable)> = Vec::new();
    let mut report = RefinementReport {
        rounds: 0,
        q_history: Vec::new(),
        q_history_per_color: Vec::new(),
        irregular_history: Vec::new(),
        k_history: Vec::new(),
        final_k: 0,
        regular: false,
        stalled: false,
        chosen: 0,
    };
    loop {
        let table = assess_pairs(host, &current, params, colors)?;
        let (q, per) = color_indices(host, &current, colors)?;
        let irregular = table.irregular_count();
        report.q_history.push(q);
        report.q_history_per_color.push(per);
        report.irregular_history.push(irregular);
        report.k_history.push(current.k());
        if within_irregular_budget(irregular, &params.epsilon, current.k(), r, p) {
            report.regular = true;
            report.final_k = current.k();
            report.chosen = visited.len();
            return Ok((current, table, report));
        }
        if report.rounds == params.max_rounds {
            visited.push((current, table));
            break;
        }
        let (next, row) = refine_step(host, &current, &table, params, colors)?;
        visited.push((current, table));
        if row.stalled {
            report.stalled = true;
            break;
        }
        report.rounds += 1;
        current = next;
    }
    // Lowest irregular share irr / (k^2 r C(p,2)); compare irr_a * tot_b < irr_b * tot_a.
    let share = |i: usize| {
        let k = report.k_history[i];
        (report.irregular_history[i] as u128, (k * k) as u128)
    };
    let mut chosen = 0;
    for i in 1..visited.len() {
        let (ia, ta) = share(i);
        let (ib, tb) = share(chosen);
        if ia * tb < ib * ta {
            chosen = i;
        }
    }
    let (partition, table) = visited.swap_remove(chosen);
    report.final_k = partition.k();
    report.chosen = chosen;
    Ok((partition, table, report))
}

/// Distributes each exceptional class over the classes of its part, every
/// vertex (ascending) going to the currently smallest class (lowest index on
/// ties). Starting from equal classes this is round-robin, and the result is
/// near-equitable.
pub fn absorb_exceptional(partition: &Partition) -> Partition {
    let parts = partition
        .parts
        .iter()
        .map(|part| {
            let mut classes = part.classes.clone();
            for v in part.exceptional.iter() {
                let target = (0..classes.len())
                    .min_by_key(|&i| (classes[i].len(), i))
                    .expect("k >= 1");
                classes[target].insert(v);
            }
            PartClasses {
                exceptional: VertexSet::empty(part.exceptional.universe()),
                classes,
            }
        })
        .collect();
    Partition {
        parts,
        k: partition.k,
        style: Style::NearEquitable,
    }
}
