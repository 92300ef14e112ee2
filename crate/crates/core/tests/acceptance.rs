//! Acceptance suite: one line per criterion, `criterion N <name>: PASS|FAIL (detail)`.
//! Every expected value is recomputed here from raw adjacency by the oracles
//! in `common`, not taken from the library.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use folkreg::embedding::{good_vertex_set, verify_embedding};
use folkreg::graph::{random_bounded_degree_graph, random_host, random_pair_graph, DenseGraph, PartiteHost, VertexSet};
use folkreg::harness::{density_color_clique, find_mono_clique, run_pipeline, PipelineConfig};
use folkreg::partition::{
    all_colors, assess_pairs, initial_partition, iterate_to_regular, refine_step, Partition, Style,
};
use folkreg::ratio::Density;
use folkreg::regularity::{
    check_pair_exhaustive, check_pair_sampled, defect_cauchy_schwarz_check, index, PairStats, RegularityParams,
    Verdict, VerdictMode,
};
use folkreg::turan::{max_kp_free_oracle, turan_bound, EdgeLabel, ReducedGraph};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn c2(p: usize) -> usize {
    p * (p - 1) / 2
}

fn turan_agreement() -> Outcome {
    let cases = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1), (4, 2)];
    let mut slowest = Duration::ZERO;
    for (p, k) in cases {
        let start = Instant::now();
        let got = max_kp_free_oracle(p, k).map_err(|e| format!("oracle ({p},{k}): {e}"))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        let bound = turan_bound(p as u64, k as u64);
        let formula = (c2(p) as u64 - 1) * (k * k) as u64;
        ensure(bound == formula, || format!("turan_bound({p},{k}) = {bound}, formula gives {formula}"))?;
        ensure(got == bound, || format!("({p},{k}): oracle {got} != bound {bound}"))?;
        ensure(took < Duration::from_secs(60), || format!("({p},{k}) took {took:?}"))?;
        if c2(p) * k * k <= 16 {
            let plain = common::turan_brute(p, k);
            ensure(plain == got, || format!("({p},{k}): plain enumeration {plain} != {got}"))?;
        }
    }
    ensure(turan_bound(3, 2) == 8, || "t_3(2) != 8".into())?;
    Ok(format!("8 cases exact, t_3(2)=8, slowest {slowest:.2?}"))
}

/// Cuts every class of every part into `h` chunks after a seeded shuffle.
fn random_refinement(host: &PartiteHost, p: &Partition, h: usize, rng: &mut ChaCha8Rng) -> Partition {
    let n = host.n();
    let parts = (0..p.p())
        .map(|s| {
            let mut classes = Vec::new();
            for class in p.classes(s) {
                let mut ids = class.to_vec();
                ids.shuffle(rng);
                let c = ids.len() / h;
                for chunk in ids.chunks(c) {
                    classes.push(VertexSet::from_iter(n, chunk.iter().copied()));
                }
            }
            (p.exceptional(s).clone(), classes)
        })
        .collect();
    Partition::new(host, parts, Style::WithExceptional).expect("refinement is a valid partition")
}

fn divisors_above_one(x: usize) -> Vec<usize> {
    (2..=x).filter(|d| x % d == 0).collect()
}

fn index_monotonicity() -> Outcome {
    let tol = big(1, 1_000_000_000_000);
    let mut steps = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..=3usize);
        let c = *[6usize, 12].choose(&mut rng).unwrap();
        let sizes = [m * c + rng.random_range(0..m), m * c + rng.random_range(0..m)];
        let prob = rng.random_range(0.1..0.9);
        let g = random_pair_graph(0..sizes[0], sizes[0]..sizes[0] + sizes[1], prob, seed);
        let host = PartiteHost::new(&sizes, g).map_err(|e| e.to_string())?;
        let mut part = initial_partition(&host, m).map_err(|e| e.to_string())?;
        let mut q = common::index(&host, &part, &[0]);
        for _ in 0..2 {
            let class = part.class_sizes(0)[0];
            let choices = divisors_above_one(class);
            if choices.is_empty() {
                break;
            }
            let h = *choices.choose(&mut rng).unwrap();
            let next = random_refinement(&host, &part, h, &mut rng);
            for (s, sizes) in (0..next.p()).map(|s| (s, next.class_sizes(s))) {
                ensure(sizes.iter().all(|&x| x * h == class), || {
                    format!("seed {seed}: part {s} chunks {sizes:?} do not divide {class} by {h}")
                })?;
            }
            let q_next = common::index(&host, &next, &[0]);
            let lib = index(&host, &next, None).map_err(|e| e.to_string())?;
            ensure(lib == q_next, || format!("seed {seed}: library index {lib} != oracle {q_next}"))?;
            ensure(&q_next - &q > -tol.clone(), || format!("seed {seed}: q fell from {q} to {q_next}"))?;
            q = q_next;
            part = next;
            steps += 1;
        }
    }
    Ok(format!("200 hosts, {steps} refinements, no decrease"))
}

fn block_host() -> PartiteHost {
    let mut edges = Vec::new();
    for blk in 0..2 {
        for u in 0..4 {
            for v in 0..4 {
                edges.push((blk * 4 + u, 8 + blk * 4 + v));
            }
        }
    }
    PartiteHost::new(&[8, 8], DenseGraph::from_edges(16, edges).unwrap()).unwrap()
}

fn refinement_increment() -> Outcome {
    let host = block_host();
    let mut params = RegularityParams::new(Ratio::new(3, 10)).map_err(|e| e.to_string())?;
    params.verdicts = VerdictMode::Exhaustive;
    let p0 = initial_partition(&host, 1).map_err(|e| e.to_string())?;
    // One class per side: 32 of 64 pairs are edges, so d = 1/2 and q = 1/4.
    let q0 = common::index(&host, &p0, &[0]);
    ensure(q0 == big(1, 4), || format!("oracle q0 = {q0}"))?;
    let table = assess_pairs(&host, &p0, &params, &[0]).map_err(|e| e.to_string())?;
    let (p1, row) = refine_step(&host, &p0, &table, &params, &[0]).map_err(|e| e.to_string())?;
    // Blocks separated: densities 1,0,0,1 over k=2 gives q = 2/4.
    let q1 = common::index(&host, &p1, &[0]);
    ensure(row.q_before == q0, || format!("reported q_before {}", row.q_before))?;
    ensure(q1 == big(1, 2), || format!("oracle q1 = {q1}"))?;
    ensure(row.q_after == q1, || format!("reported q_after {} != {q1}", row.q_after))?;
    Ok(format!("q {q0} -> {q1}, k {} -> {}", p0.k(), p1.k()))
}

/// Host whose first part interleaves two blocks, so consecutive initial classes
/// mix them and the pairs start irregular.
fn planted_host(p: usize, size: usize, seed: u64) -> PartiteHost {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p * size;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if u / size == v / size {
                continue;
            }
            let same = u % 2 == v % 2;
            if rng.random_bool(if same { 0.9 } else { 0.1 }) {
                edges.push((u, v));
            }
        }
    }
    PartiteHost::new(&vec![size; p], DenseGraph::from_edges(n, edges).unwrap()).unwrap()
}

fn iteration_bound() -> Outcome {
    let mut regular_runs = 0;
    let mut refined_runs = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let p = if seed % 2 == 0 { 2 } else { 3 };
        let size = rng.random_range(16..=if p == 2 { 200 } else { 120 });
        let host = match seed % 3 {
            0 => planted_host(p, size, seed),
            1 => random_host(p, size, 2, seed).map_err(|e| e.to_string())?,
            _ => random_host(p, size, 1, seed).map_err(|e| e.to_string())?,
        };
        let eps = *[Ratio::new(1, 5), Ratio::new(1, 4), Ratio::new(3, 10)].choose(&mut rng).unwrap();
        let mut params = RegularityParams::new(eps).map_err(|e| e.to_string())?;
        params.min_classes = 2;
        params.max_rounds = 3;
        params.class_size_floor = 4;
        params.verdicts = VerdictMode::Sampled;
        params.sample_trials = 4;
        params.seed = seed;
        let colors = all_colors(&host);
        let r = colors.len();
        let (part, table, report) = iterate_to_regular(&host, &params, &colors).map_err(|e| e.to_string())?;
        let cap = BigRational::from_integer(BigInt::from(r * c2(p)));
        for w in report.q_history.windows(2) {
            ensure(w[0] <= w[1], || format!("seed {seed}: q_history drops {} -> {}", w[0], w[1]))?;
        }
        ensure(report.q_history.iter().all(|q| *q <= cap), || format!("seed {seed}: q above {cap}"))?;
        let last = common::index(&host, &part, &colors);
        ensure(report.q_history[report.chosen] == last, || {
            format!("seed {seed}: chosen q {} != oracle {last}", report.q_history[report.chosen])
        })?;
        if report.rounds > 0 {
            refined_runs += 1;
        }
        if report.regular {
            regular_runs += 1;
            let k = part.k();
            let irregular = table.stats.values().filter(|s| s.verdict == Verdict::Irregular).count();
            ensure(table.stats.len() == k * k * r * c2(p), || format!("seed {seed}: table incomplete"))?;
            let budget = (*eps.numer() as u128) * (k * k * r * c2(p)) as u128;
            ensure((irregular as u128) * (*eps.denom() as u128) <= budget, || {
                format!("seed {seed}: {irregular} irregular pairs over the budget at k={k}")
            })?;
        }
    }
    Ok(format!("50 runs, {refined_runs} refined, {regular_runs} regular within budget"))
}

fn check_witness(g: &DenseGraph, a: &VertexSet, b: &VertexSet, st: &PairStats, eps: &Density) -> Result<(), String> {
    match (&st.witness, st.verdict) {
        (Some(w), Verdict::Irregular) => ensure(common::witness_valid(g, a, b, &w.x, &w.y, eps), || {
            format!("witness {:?} x {:?} does not re-verify", w.x.to_vec(), w.y.to_vec())
        }),
        (None, Verdict::Irregular) => Err("Irregular without a witness".into()),
        (Some(_), _) => Err("witness on a non-irregular verdict".into()),
        (None, _) => Ok(()),
    }
}

fn regularity_soundness() -> Outcome {
    let eps_list = [Ratio::new(1, 10), Ratio::new(1, 5), Ratio::new(1, 4), Ratio::new(3, 10)];
    let (mut pairs, mut regular, mut irregular, mut brute) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let na = rng.random_range(1..=10usize);
        let nb = rng.random_range(1..=10usize);
        let prob = rng.random_range(0.0..1.0);
        let g = random_pair_graph(0..na, na..na + nb, prob, seed);
        let n = na + nb;
        let full = (VertexSet::range(n, 0..na), VertexSet::range(n, na..n));
        let mut subs = vec![full.clone()];
        for _ in 0..4 {
            let pick = |rng: &mut ChaCha8Rng, range: std::ops::Range<usize>| {
                let mut ids: Vec<usize> = range.collect();
                ids.shuffle(rng);
                let keep = rng.random_range(1..=ids.len());
                VertexSet::from_iter(n, ids[..keep].iter().copied())
            };
            subs.push((pick(&mut rng, 0..na), pick(&mut rng, na..n)));
        }
        for (a, b) in &subs {
            for eps in &eps_list {
                pairs += 1;
                let ex = check_pair_exhaustive(&g, a, b, eps).map_err(|e| e.to_string())?;
                let sa = check_pair_sampled(&g, a, b, eps, 16, seed).map_err(|e| e.to_string())?;
                check_witness(&g, a, b, &ex, eps).map_err(|e| format!("seed {seed} exhaustive: {e}"))?;
                check_witness(&g, a, b, &sa, eps).map_err(|e| format!("seed {seed} sampled: {e}"))?;
                ensure(ex.verdict != Verdict::ProbablyRegular, || "exhaustive said P".into())?;
                ensure(!(ex.verdict == Verdict::Regular && sa.verdict == Verdict::Irregular), || {
                    format!("seed {seed}: sampled Irregular on an exhaustively Regular pair")
                })?;
                if a.len() <= 8 && b.len() <= 8 {
                    brute += 1;
                    let truth = common::brute_regular(&g, &a.to_vec(), &b.to_vec(), eps);
                    ensure(truth == (ex.verdict == Verdict::Regular), || {
                        format!("seed {seed}: exhaustive {:?} disagrees with brute force", ex.verdict)
                    })?;
                }
                if ex.verdict == Verdict::Regular {
                    regular += 1;
                } else {
                    irregular += 1;
                }
            }
        }
    }
    Ok(format!(
        "{pairs} pair checks ({regular} R, {irregular} I), {brute} cross-checked by brute force"
    ))
}

fn good_vertex_bound() -> Outcome {
    let (mut certified, mut checks) = (0usize, 0usize);
    for eps in [Ratio::new(1, 5), Ratio::new(3, 10)] {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
            for _ in 0..6 {
                let na = rng.random_range(3..=12usize);
                let nb = rng.random_range(3..=12usize);
                let prob = *[0.1, 0.3, 0.5, 0.7, 0.9, 1.0].choose(&mut rng).unwrap();
                let g = random_pair_graph(0..na, na..na + nb, prob, rng.random());
                let n = na + nb;
                let (a, b) = (VertexSet::range(n, 0..na), VertexSet::range(n, na..n));
                let st = check_pair_exhaustive(&g, &a, &b, &eps).map_err(|e| e.to_string())?;
                if st.verdict != Verdict::Regular {
                    continue;
                }
                certified += 1;
                let (e, pairs) = common::density(&g, &a.to_vec(), &b.to_vec());
                let d = Ratio::new(e, pairs);
                // Smallest |Y| with |Y| >= eps |B|.
                let y_min = (nb as u64 * eps.numer()).div_ceil(*eps.denom()) as usize;
                for _ in 0..20 {
                    let size = rng.random_range(y_min.max(1)..=nb);
                    let mut ids: Vec<usize> = (na..n).collect();
                    ids.shuffle(&mut rng);
                    let y = VertexSet::from_iter(n, ids[..size].iter().copied());
                    let good = good_vertex_set(&g, &a, &y, &d, &eps);
                    // Oracle: deg_Y(v) >= (d - eps)|Y|, cross-multiplied.
                    let expect = a
                        .iter()
                        .filter(|&v| {
                            let deg = common::edges_between(&g, &[v], &y.to_vec()) as i128;
                            let lhs = deg * (*d.denom() as i128) * (*eps.denom() as i128);
                            let rhs = ((*d.numer() as i128) * (*eps.denom() as i128)
                                - (*eps.numer() as i128) * (*d.denom() as i128))
                                * size as i128;
                            lhs >= rhs
                        })
                        .count();
                    ensure(good.len() == expect, || format!("good set {} != oracle {expect}", good.len()))?;
                    // |good| >= (1 - eps)|A|  <=>  |good| den >= (den - num)|A|
                    let ok = (good.len() as u64) * eps.denom() >= (eps.denom() - eps.numer()) * na as u64;
                    ensure(ok, || {
                        format!("eps {eps} seed {seed}: {} good of {na} for |Y|={size}", good.len())
                    })?;
                    checks += 1;
                }
            }
        }
    }
    ensure(certified > 0, || "no pair was certified regular".into())?;
    Ok(format!("{certified} certified pairs, {checks} Y draws, 0 violations"))
}

fn ramsey_step() -> Outcome {
    let edges: Vec<(usize, usize)> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
    for mask in 0u32..(1 << 15) {
        let color = |x: usize, y: usize| {
            let at = edges.iter().position(|&e| e == (x.min(y), x.max(y))).unwrap();
            (mask >> at & 1) as usize
        };
        ensure(common::has_mono_triangle(6, &color), || format!("coloring {mask:#x} has no mono triangle"))?;
        let (c, tri) = find_mono_clique(6, 3, color).ok_or_else(|| format!("find_mono_clique missed {mask:#x}"))?;
        ensure(
            color(tri[0], tri[1]) == c && color(tri[0], tri[2]) == c && color(tri[1], tri[2]) == c,
            || format!("{mask:#x}: returned triangle {tri:?} is not color {c}"),
        )?;
        let mut f = ReducedGraph::new(6, 1);
        for &(x, y) in &edges {
            let densities = if color(x, y) == 0 {
                vec![Ratio::new(1, 1), Ratio::new(0, 1)]
            } else {
                vec![Ratio::new(0, 1), Ratio::new(1, 1)]
            };
            f.insert_edge((x, 0), (y, 0), EdgeLabel { densities, certified: true })
                .map_err(|e| e.to_string())?;
        }
        let clique: Vec<(usize, usize)> = (0..6).map(|s| (s, 0)).collect();
        let dc = density_color_clique(&clique, &f, 3, 2).map_err(|e| format!("{mask:#x}: {e}"))?;
        let ids: Vec<usize> = dc.nodes.iter().map(|n| n.0).collect();
        ensure(
            color(ids[0], ids[1]) == dc.color && color(ids[0], ids[2]) == dc.color && color(ids[1], ids[2]) == dc.color,
            || format!("{mask:#x}: density coloring returned a non-monochromatic triple"),
        )?;
    }
    // Pentagon in color 0, pentagram in color 1.
    let c5 = |x: usize, y: usize| usize::from((x + 5 - y) % 5 != 1 && (y + 5 - x) % 5 != 1);
    ensure(!common::has_mono_triangle(5, &c5), || "C5 coloring has a triangle (oracle)".into())?;
    ensure(find_mono_clique(5, 3, c5).is_none(), || "C5 coloring has a triangle (library)".into())?;
    Ok("2^15 colorings of K_6 all contain one; C5 coloring of K_5 has none".into())
}

fn verify_success(host: &PartiteHost, report: &folkreg::harness::PipelineReport, seed: u64) -> Result<(), String> {
    let color = report.color().ok_or_else(|| format!("seed {seed}: success without a color"))?;
    let emb = report.embedding.as_ref().ok_or_else(|| format!("seed {seed}: success without an embedding"))?;
    let images: Vec<usize> = emb.images.iter().map(|i| i.ok_or("unmapped vertex")).collect::<Result<_, _>>()?;
    ensure(
        common::embedding_valid(host, color, &report.target, &images, &emb.clusters, &emb.phi),
        || format!("seed {seed}: oracle rejects the embedding"),
    )?;
    let layer = host.layer(Some(color)).map_err(|e| e.to_string())?;
    let lib = verify_embedding(&report.target, emb, layer).map_err(|e| e.to_string())?;
    ensure(lib, || format!("seed {seed}: verify_embedding rejects the embedding"))
}

fn end_to_end() -> Outcome {
    let mut successes = 0;
    let mut slowest = Duration::ZERO;
    for seed in 1..=20u64 {
        let start = Instant::now();
        let host = random_host(6, 48, 2, seed).map_err(|e| e.to_string())?;
        let target = random_bounded_degree_graph(8, 3, seed);
        let cfg = PipelineConfig::new(3, 2, 6, 48, Ratio::new(1, 10), seed);
        let report = run_pipeline(&host, &target, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(took < Duration::from_secs(60), || format!("seed {seed} took {took:?}"))?;
        if report.success {
            verify_success(&host, &report, seed)?;
            successes += 1;
        }
    }
    ensure(successes >= 18, || format!("{successes}/20 successes"))?;
    Ok(format!("{successes}/20 verified successes, slowest {slowest:.2?}"))
}

fn multicolor_smoke() -> Outcome {
    let mut lines = Vec::new();
    for seed in 1..=5 {
        lines.push(format!("seed {seed}: {}", multicolor_seed(seed)?));
    }
    Ok(lines.join("; "))
}

fn multicolor_seed(seed: u64) -> Outcome {
    let (p, r, delta, size) = (17, 3, 3, 8);
    let host = random_host(p, size, r, seed).map_err(|e| e.to_string())?;
    let target = random_bounded_degree_graph(8, 3, seed);
    let mut cfg = PipelineConfig::new(delta, r, p, size, Ratio::new(1, 10), seed);
    cfg.class_size_floor = 2;
    let report = run_pipeline(&host, &target, &cfg).map_err(|e| e.to_string())?;
    let mut checked = Vec::new();

    let part = report.partition.as_ref().ok_or("no partition stage output")?;
    part.validate(&host).map_err(|e| e.to_string())?;
    ensure(part.style() == Style::NearEquitable, || "partition is not near-equitable".into())?;
    checked.push("partition");

    let reduced = report.reduced.as_ref().ok_or("no reduced graph")?;
    for ((s, i), (t, j), label) in reduced.edges() {
        let (x, y) = (part.class(s, i).to_vec(), part.class(t, j).to_vec());
        ensure(label.densities.len() == r, || "label has the wrong color count".into())?;
        for (c, d) in label.densities.iter().enumerate() {
            let layer = host.layer(Some(c)).map_err(|e| e.to_string())?;
            let (e, pairs) = common::density(layer, &x, &y);
            ensure(*d == Ratio::new(e, pairs), || format!("label density mismatch on {s}.{i}-{t}.{j}"))?;
        }
    }
    checked.push("reduce");

    for clique in &report.cliques {
        ensure(clique.len() == p, || "clique is not transversal".into())?;
        for (x, a) in clique.iter().enumerate() {
            ensure(a.0 == x, || "clique parts out of order".into())?;
            for b in &clique[x + 1..] {
                ensure(reduced.has_edge(*a, *b), || format!("clique pair {a:?}-{b:?} is not an edge"))?;
            }
        }
    }
    checked.push("clique");

    if let (Some(dc), Some(clique)) = (&report.coloring, &report.clique) {
        for &((x, y), c) in &dc.pair_colors {
            let layer = host.layer(Some(c)).map_err(|e| e.to_string())?;
            let (e, pairs) = common::density(
                layer,
                &part.class(clique[x].0, clique[x].1).to_vec(),
                &part.class(clique[y].0, clique[y].1).to_vec(),
            );
            ensure(e * r as u64 >= pairs, || format!("pair {x}-{y} color {c} below 1/{r}"))?;
        }
        let pos: Vec<usize> = dc.nodes.iter().map(|n| clique.iter().position(|m| m == n).unwrap()).collect();
        for (a, &x) in pos.iter().enumerate() {
            for &y in &pos[a + 1..] {
                let c = dc.pair_colors.iter().find(|(xy, _)| *xy == (x.min(y), x.max(y))).map(|(_, c)| *c);
                ensure(c == Some(dc.color), || "ramsey clique is not monochromatic".into())?;
            }
        }
        checked.push("ramsey");
    }
    if report.success {
        verify_success(&host, &report, seed)?;
        checked.push("embed");
    }
    Ok(format!("success={} re-verified {}", report.success, checked.join(",")))
}

fn defect_cauchy_schwarz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..1000 {
        let s = rng.random_range(2..=12usize);
        let t = rng.random_range(1..s);
        let d: Vec<BigRational> = (0..s)
            .map(|_| big(rng.random_range(0..=40), rng.random_range(1..=40)))
            .collect();
        let s_r = big(s as i64, 1);
        let t_r = big(t as i64, 1);
        let mean_s = d.iter().cloned().sum::<BigRational>() / &s_r;
        let mean_t = d[..t].iter().cloned().sum::<BigRational>() / &t_r;
        let delta = &mean_s - &mean_t;
        let ok = defect_cauchy_schwarz_check(&d, t, &delta).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(ok, || format!("trial {trial}: library rejects {d:?}"))?;
        // Oracle: Σd² - s·mean² equals the spread, which must cover t s δ² / (s-t).
        let spread: BigRational = d.iter().map(|x| (x - &mean_s) * (x - &mean_s)).sum();
        let need = &t_r * &s_r * &delta * &delta / big((s - t) as i64, 1);
        ensure(spread >= need, || format!("trial {trial}: oracle inequality fails"))?;
    }
    let d = [big(0, 1), big(1, 1)];
    let delta = big(1, 2);
    ensure(defect_cauchy_schwarz_check(&d, 1, &delta) == Ok(true), || "equality case rejected".into())?;
    let lhs = (&d[0] * &d[0] + &d[1] * &d[1]) / big(2, 1);
    let rhs = big(1, 4) + &delta * &delta;
    ensure(lhs == rhs, || format!("equality case: {lhs} != {rhs}"))?;
    Ok("1000 vectors hold; (0,1) with t=1 gives 1/2 = 1/2".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("turan-agreement", turan_agreement),
        ("index-monotonicity", index_monotonicity),
        ("refinement-increment", refinement_increment),
        ("iteration-bound", iteration_bound),
        ("regularity-soundness", regularity_soundness),
        ("good-vertex-bound", good_vertex_bound),
        ("ramsey-step", ramsey_step),
        ("end-to-end", end_to_end),
        ("multicolor-smoke", multicolor_smoke),
        ("defect-cauchy-schwarz", defect_cauchy_schwarz),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {took:.2?})", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
