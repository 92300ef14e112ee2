//! End-to-end pipeline: regularize an edge-colored complete multipartite
//! host, pick a regular cluster clique, find a monochromatic `K_Δ` among its
//! density colors, and embed the target graph in that color.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::embedding::{
    embed, proper_coloring, verify_embedding, Choice, EmbedOptions, EmbedOutcome, EmbeddingState,
    TargetGraph,
};
use crate::error::{Error, Result};
use crate::graph::{density, monochrome_subgraph, DenseGraph, PartiteHost};
use crate::partition::{
    absorb_exceptional, all_colors, assess_pairs, iterate_to_regular, PairKey, PairTable,
    Partition, RefinementReport,
};
use crate::ratio::{density_to_index, fmt_ratio, Density};
use crate::regularity::{index, RefineMode, RegularityParams, Verdict, VerdictMode};
use crate::turan::{cluster_cliques, ClusterNode, EdgeLabel, ReducedGraph};

/// Known small Ramsey numbers `R_r(K_Δ)`.
pub fn ramsey_number(r: usize, delta: usize) -> Option<usize> {
    match (r, delta) {
        (_, 1) => Some(1),
        (_, 2) => Some(r + 1),
        (2, 3) => Some(6),
        (2, 4) => Some(18),
        (3, 3) => Some(17),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub delta: usize,
    pub r: usize,
    pub p: usize,
    pub epsilon: Density,
    pub m: usize,
    pub part_size: usize,
    pub mode: RefineMode,
    pub verdicts: VerdictMode,
    /// Extra pivot and random-subset probes per pair. The default 0 keeps
    /// only the held-out degree splits: at desk scale random pairs have
    /// small deviating sub-pairs, and every extra probe finds more of them.
    pub sample_trials: usize,
    pub max_rounds: usize,
    pub class_size_floor: usize,
    /// Alternative cluster cliques tried after the first embedding failure.
    pub retries: usize,
    /// Require `epsilon <= min(1/p², 1/m)`.
    pub paper_strict: bool,
    pub choice: Choice,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(delta: usize, r: usize, p: usize, part_size: usize, epsilon: Density, seed: u64) -> Self {
        PipelineConfig {
            delta,
            r,
            p,
            epsilon,
            m: 2,
            part_size,
            mode: RefineMode::Practical,
            verdicts: VerdictMode::Sampled,
            sample_trials: 0,
            max_rounds: 2,
            class_size_floor: 12,
            retries: 8,
            paper_strict: false,
            choice: Choice::Lowest,
            seed,
        }
    }

    fn params(&self) -> Result<RegularityParams> {
        let mut params = RegularityParams::new(self.epsilon)?;
        params.min_classes = self.m;
        params.max_rounds = self.max_rounds;
        params.class_size_floor = self.class_size_floor;
        params.mode = self.mode;
        params.verdicts = self.verdicts;
        params.sample_trials = self.sample_trials;
        params.seed = self.seed;
        Ok(params)
    }
}

/// Builds the reduced graph from a verdict table: clusters are the classes,
/// and two clusters of different parts are adjacent when no color layer
/// judged their pair irregular. Labels carry per-color densities.
pub fn reduced_graph(partition: &Partition, table: &PairTable) -> Result<ReducedGraph> {
    let k = partition.k();
    let mut f = ReducedGraph::new(partition.p(), k);
    for s in 0..partition.p() {
        for t in s + 1..partition.p() {
            for i in 0..k {
                for j in 0..k {
                    let mut densities = Vec::with_capacity(table.colors.len());
                    let mut irregular = false;
                    let mut certified = true;
                    for &color in &table.colors {
                        let st = table.get(&PairKey { s, i, t, j, color }).ok_or_else(|| {
                            Error::State(format!(
                                "no verdict for pair ({s},{}) ({t},{}) in color {color}",
                                i + 1,
                                j + 1
                            ))
                        })?;
                        irregular |= st.verdict.is_irregular();
                        certified &= st.verdict == Verdict::Regular;
                        densities.push(st.density);
                    }
                    if table.colors.is_empty() {
                        return Err(Error::State("verdict table has no colors".into()));
                    }
                    if !irregular {
                        f.insert_edge((s, i), (t, j), EdgeLabel { densities, certified })?;
                    }
                }
            }
        }
    }
    Ok(f)
}

/// Assesses `partition` in every color of `host` and builds its reduced graph.
pub fn reduced_graph_for(
    host: &PartiteHost,
    partition: &Partition,
    params: &RegularityParams,
) -> Result<ReducedGraph> {
    let table = assess_pairs(host, partition, params, &all_colors(host))?;
    reduced_graph(partition, &table)
}

/// First monochromatic `K_delta` of a pair-colored `K_p`, scanning vertex
/// subsets in lexicographic order. `color(x, y)` is called with `x < y`.
pub fn find_mono_clique(
    p: usize,
    delta: usize,
    color: impl Fn(usize, usize) -> usize,
) -> Option<(usize, Vec<usize>)> {
    if delta == 0 || delta > p {
        return None;
    }
    let mut pick: Vec<usize> = (0..delta).collect();
    loop {
        let c = if delta == 1 { 0 } else { color(pick[0], pick[1]) };
        let mono = pick
            .iter()
            .enumerate()
            .all(|(a, &x)| pick[a + 1..].iter().all(|&y| color(x, y) == c));
        if mono {
            return Some((c, pick));
        }
        // Next combination.
        let mut i = delta;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if pick[i] < p - delta + i {
                break;
            }
        }
        pick[i] += 1;
        for x in i + 1..delta {
            pick[x] = pick[x - 1] + 1;
        }
    }
}

/// Result of the density-color step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityColoring {
    pub color: usize,
    pub nodes: Vec<ClusterNode>,
    /// Chosen color of every clique pair `(x, y)`, `x < y`, positions in the clique.
    pub pair_colors: Vec<((usize, usize), usize)>,
}

/// Colors every pair of `clique` with the lowest color of density at least
/// `1/r` and returns the lexicographically least monochromatic `K_delta`.
pub fn density_color_clique(
    clique: &[ClusterNode],
    f: &ReducedGraph,
    delta: usize,
    r: usize,
) -> Result<DensityColoring> {
    if r == 0 {
        return Err(Error::arg("r must be at least 1"));
    }
    if delta > clique.len() {
        return Err(Error::arg(format!(
            "K_{delta} cannot fit in a clique of {} clusters",
            clique.len()
        )));
    }
    let q = clique.len();
    let mut colors = vec![vec![0usize; q]; q];
    let mut pair_colors = Vec::new();
    let threshold = Density::new(1, r as u64);
    for x in 0..q {
        for y in x + 1..q {
            let label = f.label(clique[x], clique[y]).ok_or_else(|| {
                Error::arg(format!("clusters {:?} and {:?} are not adjacent", clique[x], clique[y]))
            })?;
            let c = if r == 1 {
                0
            } else {
                label
                    .densities
                    .iter()
                    .position(|d| *d >= threshold)
                    .ok_or_else(|| {
                        Error::Diagnostic(format!(
                            "no color reaches density 1/{r} on {:?}-{:?}",
                            clique[x], clique[y]
                        ))
                    })?
            };
            colors[x][y] = c;
            pair_colors.push(((x, y), c));
        }
    }
    match find_mono_clique(q, delta, |x, y| colors[x][y]) {
        Some((color, pick)) => Ok(DensityColoring {
            color,
            nodes: pick.into_iter().map(|x| clique[x]).collect(),
            pair_colors,
        }),
        None => {
            let shown: Vec<String> = pair_colors
                .iter()
                .map(|((x, y), c)| format!("{x}-{y}:{c}"))
                .collect();
            Err(Error::NotFound(format!(
                "no monochromatic K_{delta}; pair colors {}",
                shown.join(",")
            )))
        }
    }
}

/// Largest `ε = 2^-j`, `1 <= j <= 20`, with `(1 - Δε)(1/r - ε)^Δ m >= 1`,
/// additionally at most `min(1/p², 1/m)` when `p` is given.
pub fn feasible_epsilon(delta: usize, r: usize, m: usize, p: Option<usize>) -> Result<Density> {
    if delta == 0 || r == 0 || m == 0 {
        return Err(Error::arg("delta, r and m must be positive"));
    }
    let one = BigRational::one();
    let int = |x: usize| BigRational::from_integer(BigInt::from(x));
    let cap = p.map(|p| {
        let a = Density::new(1, (p * p) as u64);
        let b = Density::new(1, m as u64);
        if a < b {
            a
        } else {
            b
        }
    });
    for j in 1..=20u32 {
        let eps = Density::new(1, 1u64 << j);
        if cap.is_some_and(|c| eps > c) {
            continue;
        }
        let e = density_to_index(&eps);
        let first = &one - int(delta) * &e;
        let base = &one / int(r) - &e;
        if first < BigRational::from_integer(0.into()) || base < BigRational::from_integer(0.into()) {
            continue;
        }
        let lhs = (0..delta).fold(first * int(m), |acc, _| acc * &base);
        if lhs >= one {
            return Ok(eps);
        }
    }
    Err(Error::Infeasible(format!(
        "no epsilon in 2^-1..2^-20 satisfies (1 - {delta}e)(1/{r} - e)^{delta} * {m} >= 1; use a larger m"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub name: &'static str,
    pub ok: bool,
    pub ms: u128,
    pub payload: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineReport {
    pub success: bool,
    pub stages: Vec<StageRecord>,
    pub refinement: Option<RefinementReport>,
    pub partition: Option<Partition>,
    pub reduced: Option<ReducedGraph>,
    pub cliques: Vec<Vec<ClusterNode>>,
    /// Clique used for the successful (or last) embedding attempt.
    pub clique: Option<Vec<ClusterNode>>,
    pub coloring: Option<DensityColoring>,
    pub target: DenseGraph,
    pub embedding: Option<EmbeddingState>,
    pub failure: Option<String>,
}

impl PipelineReport {
    pub fn color(&self) -> Option<usize> {
        self.coloring.as_ref().map(|c| c.color)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Structured text report. With `timings = false` every `ms=` field is 0
    /// so that reruns compare byte for byte.
    pub fn to_text(&self, timings: bool) -> String {
        let mut out = format!("folkman success={}", self.success);
        if let Some(c) = self.color() {
            write!(out, " color={c}").unwrap();
        }
        out.push('\n');
        for st in &self.stages {
            writeln!(
                out,
                "stage {} status={} ms={}",
                st.name,
                if st.ok { "ok" } else { "fail" },
                if timings { st.ms } else { 0 }
            )
            .unwrap();
            for line in &st.payload {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// What `verify` needs from a report: the outcome, the color, the target
/// graph, and the embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportSummary {
    pub success: bool,
    pub color: Option<usize>,
    pub target: Option<DenseGraph>,
    pub embedding: Option<EmbeddingState>,
}

pub fn parse_report(text: &str, universe: usize) -> Result<ReportSummary> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or_else(|| Error::parse(1, "empty report"))?;
    let mut success = None;
    let mut color = None;
    let mut words = header.split_whitespace();
    if words.next() != Some("folkman") {
        return Err(Error::parse(1, "expected `folkman success=<bool> [color=<c>]`"));
    }
    for w in words {
        if let Some(v) = w.strip_prefix("success=") {
            success = Some(v == "true");
        } else if let Some(v) = w.strip_prefix("color=") {
            color = Some(v.parse().map_err(|_| Error::parse(1, format!("bad color {v:?}")))?);
        }
    }
    let success = success.ok_or_else(|| Error::parse(1, "missing success="))?;
    let mut target = None;
    if let Some(at) = lines.iter().position(|l| l.starts_with("graph ")) {
        let m: usize = lines[at]
            .split_whitespace()
            .nth(2)
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::parse(at + 1, "bad graph header"))?;
        if at + 1 + m > lines.len() {
            return Err(Error::parse(lines.len(), "target graph truncated"));
        }
        let block = lines[at..at + 1 + m].join("\n");
        target = Some(DenseGraph::parse(&block).map_err(|e| match e {
            Error::Parse { line, msg } => Error::parse(line + at, msg),
            other => other,
        })?);
    }
    let embedding = if text.lines().any(|l| l.starts_with("map ")) {
        Some(EmbeddingState::parse(text, universe)?)
    } else {
        None
    };
    Ok(ReportSummary {
        success,
        color,
        target,
        embedding,
    })
}

fn node_list(nodes: &[ClusterNode]) -> String {
    let v: Vec<String> = nodes.iter().map(|(s, i)| format!("{s}.{}", i + 1)).collect();
    v.join(" ")
}

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Clock(Instant::now())
    }

    fn ms(&self) -> u128 {
        self.0.elapsed().as_millis()
    }
}

/// Runs every stage on `host` and reports where it stopped. Only
/// precondition violations are errors; stage failures are recorded.
pub fn run_pipeline(host: &PartiteHost, target: &DenseGraph, cfg: &PipelineConfig) -> Result<PipelineReport> {
    validate(host, target, cfg)?;
    let params = cfg.params()?;
    let colors = all_colors(host);
    let mut report = PipelineReport {
        success: false,
        stages: Vec::new(),
        refinement: None,
        partition: None,
        reduced: None,
        cliques: Vec::new(),
        clique: None,
        coloring: None,
        target: target.clone(),
        embedding: None,
        failure: None,
    };
    let fail = |report: &mut PipelineReport, msg: String| {
        report.failure = Some(msg);
    };

    let clock = Clock::start();
    let (partition, _, refinement) = iterate_to_regular(host, &params, &colors)?;
    report.stages.push(StageRecord {
        name: "partition",
        ok: true,
        ms: clock.ms(),
        payload: refinement.to_lines(),
    });
    report.refinement = Some(refinement);

    let clock = Clock::start();
    let near = absorb_exceptional(&partition);
    let q = index(host, &near, None)?;
    let mut reassess = params.clone();
    reassess.seed = params.seed ^ 0x5eed_ab50;
    let table = assess_pairs(host, &near, &reassess, &colors)?;
    report.stages.push(StageRecord {
        name: "absorb",
        ok: true,
        ms: clock.ms(),
        payload: near.to_text(&cfg.epsilon, &q).lines().map(str::to_string).collect(),
    });

    let clock = Clock::start();
    let reduced = reduced_graph(&near, &table)?;
    report.stages.push(StageRecord {
        name: "reduce",
        ok: true,
        ms: clock.ms(),
        payload: reduced.to_text().lines().map(str::to_string).collect(),
    });

    let clock = Clock::start();
    let cliques = cluster_cliques(&reduced, |_, _, _| true, cfg.retries + 1);
    let ok = !cliques.is_empty();
    report.stages.push(StageRecord {
        name: "clique",
        ok,
        ms: clock.ms(),
        payload: cliques
            .iter()
            .enumerate()
            .map(|(i, c)| format!("clique {i}: {}", node_list(c)))
            .collect(),
    });
    report.partition = Some(near.clone());
    report.reduced = Some(reduced.clone());
    report.cliques = cliques.clone();
    if !ok {
        fail(&mut report, "reduced graph has no transversal clique".into());
        return Ok(report);
    }

    let clock = Clock::start();
    let mut ramsey = Vec::new();
    let mut payload = Vec::new();
    for (i, clique) in cliques.iter().enumerate() {
        match density_color_clique(clique, &reduced, cfg.delta, cfg.r) {
            Ok(dc) => {
                recheck_densities(host, &near, &dc, clique, cfg.r)?;
                payload.push(format!(
                    "ramsey clique={i} color={} nodes={}",
                    dc.color,
                    node_list(&dc.nodes)
                ));
                ramsey.push((i, dc));
            }
            Err(e @ Error::NotFound(_)) => payload.push(format!("ramsey clique={i} fail {e}")),
            Err(e) => return Err(e),
        }
    }
    let ok = !ramsey.is_empty();
    report.stages.push(StageRecord {
        name: "ramsey",
        ok,
        ms: clock.ms(),
        payload,
    });
    if !ok {
        fail(&mut report, "no clique yields a monochromatic K_delta".into());
        return Ok(report);
    }

    let clock = Clock::start();
    let coloring = proper_coloring(target, cfg.delta);
    let mut payload: Vec<String> = target.to_text().lines().map(str::to_string).collect();
    let phi = match coloring {
        Ok(phi) => {
            let shown: Vec<String> = phi.iter().map(|c| (c + 1).to_string()).collect();
            payload.push(format!("coloring {}", shown.join(" ")));
            Some(phi)
        }
        Err(e) => {
            payload.push(format!("coloring fail {e}"));
            None
        }
    };
    report.stages.push(StageRecord {
        name: "coloring",
        ok: phi.is_some(),
        ms: clock.ms(),
        payload,
    });
    let Some(phi) = phi else {
        fail(&mut report, "target graph has no proper delta-coloring".into());
        return Ok(report);
    };
    let tg = TargetGraph {
        graph: target.clone(),
        delta: cfg.delta,
        phi,
    };

    let clock = Clock::start();
    let d_floor = Density::new(1, cfg.r as u64);
    let mut payload = Vec::new();
    let mut found = None;
    for (i, dc) in &ramsey {
        let g = monochrome_subgraph(host, dc.color)?;
        let clusters: Vec<_> = dc.nodes.iter().map(|&(s, c)| near.class(s, c).clone()).collect();
        let opts = EmbedOptions {
            choice: cfg.choice,
            certified: false,
        };
        match embed(&tg, &g, &clusters, &cfg.epsilon, &d_floor, opts)? {
            EmbedOutcome::Success(state) => {
                payload.push(format!("attempt clique={i} color={} result=ok", dc.color));
                payload.extend(state.ledger.iter().map(|r| r.to_line()));
                payload.extend(state.to_text().lines().map(str::to_string));
                found = Some((*i, dc.clone(), state, g));
                break;
            }
            EmbedOutcome::Failure(trace) => {
                payload.push(format!("attempt clique={i} color={} result=fail", dc.color));
                payload.push(trace.to_line());
                report.failure = Some(trace.to_line());
            }
        }
    }
    report.stages.push(StageRecord {
        name: "embed",
        ok: found.is_some(),
        ms: clock.ms(),
        payload,
    });
    let Some((i, dc, state, g)) = found else {
        report.clique = ramsey.last().map(|(i, _)| cliques[*i].clone());
        report.coloring = ramsey.last().map(|(_, dc)| dc.clone());
        return Ok(report);
    };
    report.clique = Some(cliques[i].clone());
    report.coloring = Some(dc);

    let clock = Clock::start();
    let verified = verify_embedding(target, &state, &g)?;
    report.stages.push(StageRecord {
        name: "verify",
        ok: verified,
        ms: clock.ms(),
        payload: vec![format!("verify color={} result={verified}", report.color().unwrap())],
    });
    report.embedding = Some(state);
    report.success = verified;
    report.failure = if verified {
        None
    } else {
        Some("embedding failed verification".into())
    };
    Ok(report)
}

fn validate(host: &PartiteHost, target: &DenseGraph, cfg: &PipelineConfig) -> Result<()> {
    if cfg.delta == 0 || cfg.r == 0 || cfg.m == 0 {
        return Err(Error::arg("delta, r and m must be positive"));
    }
    if target.max_degree() > cfg.delta {
        return Err(Error::arg(format!(
            "target maximum degree {} exceeds delta = {}",
            target.max_degree(),
            cfg.delta
        )));
    }
    if host.p() != cfg.p {
        return Err(Error::arg(format!("host has {} parts, config says p = {}", host.p(), cfg.p)));
    }
    if cfg.delta > cfg.p {
        return Err(Error::arg(format!("delta = {} exceeds p = {}", cfg.delta, cfg.p)));
    }
    if host.colors().unwrap_or(1) != cfg.r {
        return Err(Error::arg(format!(
            "host carries {} colors, config says r = {}",
            host.colors().unwrap_or(1),
            cfg.r
        )));
    }
    if host.part_sizes().iter().any(|&s| s != cfg.part_size) {
        return Err(Error::arg(format!("host parts are not all of size {}", cfg.part_size)));
    }
    if !host.is_complete_partite() {
        return Err(Error::arg("host is not complete multipartite"));
    }
    if cfg.paper_strict {
        let cap = std::cmp::min(Density::new(1, (cfg.p * cfg.p) as u64), Density::new(1, cfg.m as u64));
        if cfg.epsilon > cap {
            return Err(Error::arg(format!(
                "epsilon {} exceeds min(1/p^2, 1/m) = {}",
                fmt_ratio(&cfg.epsilon),
                fmt_ratio(&cap)
            )));
        }
    }
    Ok(())
}

/// Recomputes each density-color choice from raw adjacency and checks the
/// `1/r` threshold; also checks that some color reaches it on every pair.
fn recheck_densities(
    host: &PartiteHost,
    partition: &Partition,
    dc: &DensityColoring,
    clique: &[ClusterNode],
    r: usize,
) -> Result<()> {
    let threshold = Density::new(1, r as u64);
    for &((x, y), c) in &dc.pair_colors {
        let (a, b) = (clique[x], clique[y]);
        let (ca, cb) = (partition.class(a.0, a.1), partition.class(b.0, b.1));
        let layer = host.layer(host.colors().map(|_| c))?;
        let d = density(layer, ca, cb)?;
        if d < threshold {
            return Err(Error::Diagnostic(format!(
                "pair {a:?}-{b:?} has density {} < 1/{r} in color {c}",
                fmt_ratio(&d)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_bounded_degree_graph, random_host};

    #[test]
    fn ramsey_lookup() {
        assert_eq!(ramsey_number(2, 3), Some(6));
        assert_eq!(ramsey_number(2, 4), Some(18));
        assert_eq!(ramsey_number(2, 5), None);
    }

    #[test]
    fn pentagon_coloring_has_no_mono_triangle() {
        let c5 = |x: usize, y: usize| usize::from((y - x) % 5 != 1 && (y - x) % 5 != 4);
        assert_eq!(find_mono_clique(5, 3, c5), None);
        assert_eq!(find_mono_clique(4, 3, |_, _| 1), Some((1, vec![0, 1, 2])));
    }

    #[test]
    fn density_coloring_single_color_takes_first_nodes() {
        let f = ReducedGraph::complete(5, 2);
        let clique: Vec<ClusterNode> = (0..5).map(|s| (s, 0)).collect();
        let dc = density_color_clique(&clique, &f, 3, 1).unwrap();
        assert_eq!(dc.color, 0);
        assert_eq!(dc.nodes, vec![(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn density_coloring_not_found_on_pentagon() {
        let mut f = ReducedGraph::new(5, 1);
        for x in 0..5 {
            for y in x + 1..5 {
                let red = (y - x) % 5 == 1 || (y - x) % 5 == 4;
                let d = if red { [Density::new(3, 4), Density::new(1, 4)] } else { [Density::new(1, 4), Density::new(3, 4)] };
                f.insert_edge((x, 0), (y, 0), EdgeLabel { densities: d.to_vec(), certified: true }).unwrap();
            }
        }
        let clique: Vec<ClusterNode> = (0..5).map(|s| (s, 0)).collect();
        let err = density_color_clique(&clique, &f, 3, 2).unwrap_err();
        assert!(matches!(&err, Error::NotFound(m) if m.contains("0-1:0")), "{err}");
    }

    #[test]
    fn feasible_epsilon_examples() {
        let eps = feasible_epsilon(3, 2, 64, None).unwrap();
        assert!(eps >= Density::new(1, 1024));
        assert!(matches!(feasible_epsilon(3, 2, 7, None), Err(Error::Infeasible(_))));
        assert!(matches!(feasible_epsilon(3, 2, 8, None), Err(Error::Infeasible(_))));
        let capped = feasible_epsilon(3, 2, 64, Some(6)).unwrap();
        assert!(capped <= Density::new(1, 36));
    }

    #[test]
    fn one_color_host_succeeds() {
        // Every edge color 0 in a 2-colored host.
        let (p, size) = (3, 12);
        let n = p * size;
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|(u, v)| u / size != v / size)
            .map(|(u, v)| (u, v, 0));
        let host = PartiteHost::colored(&vec![size; p], 2, edges).unwrap();
        let g = random_bounded_degree_graph(8, 3, 1);
        let mut cfg = PipelineConfig::new(3, 2, p, size, Density::new(1, 10), 7);
        cfg.class_size_floor = 4;
        let report = run_pipeline(&host, &g, &cfg).unwrap();
        assert!(report.success, "{}", report.to_text(false));
        assert_eq!(report.color(), Some(0));
    }

    #[test]
    fn degree_too_large_is_an_argument_error() {
        let host = random_host(6, 8, 2, 1).unwrap();
        let cfg = PipelineConfig::new(3, 2, 6, 8, Density::new(1, 10), 1);
        let err = run_pipeline(&host, &DenseGraph::complete(5), &cfg).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn report_parses_back() {
        let host = random_host(6, 48, 2, 11).unwrap();
        let g = random_bounded_degree_graph(8, 3, 11);
        let cfg = PipelineConfig::new(3, 2, 6, 48, Density::new(1, 10), 11);
        let report = run_pipeline(&host, &g, &cfg).unwrap();
        let text = report.to_text(false);
        assert_eq!(text, run_pipeline(&host, &g, &cfg).unwrap().to_text(false));
        let summary = parse_report(&text, host.n()).unwrap();
        assert_eq!(summary.success, report.success);
        if report.stage("coloring").is_some() {
            assert_eq!(summary.target.as_ref(), Some(&g));
        }
        assert!(report.success);
        {
            let layer = monochrome_subgraph(&host, summary.color.unwrap()).unwrap();
            assert!(verify_embedding(&g, summary.embedding.as_ref().unwrap(), &layer).unwrap());
        }
    }
}
