use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use folkreg::embedding::{
    embed, verify_embedding, Choice, EmbedOptions, EmbedOutcome, EmbeddingState, TargetGraph,
};
use folkreg::graph::{
    monochrome_subgraph, random_bounded_degree_graph, random_host, DenseGraph, PartiteHost,
    VertexSet,
};
use folkreg::harness::{parse_report, run_pipeline, PipelineConfig};
use folkreg::partition::{absorb_exceptional, all_colors, assess_pairs, iterate_to_regular, Partition};
use folkreg::ratio::{parse_ratio, Density};
use folkreg::regularity::{check_pair, index, PairRecord, RefineMode, RegularityParams, VerdictMode};
use folkreg::turan::{max_kp_free_oracle, turan_bound};
use folkreg::Error;

#[derive(Parser)]
#[command(name = "folkreg", version, about = "Regularity partitions and monochromatic embeddings in multipartite hosts")]
struct Cli {
    /// Worker threads for pair checks.
    #[arg(long, global = true, env = "FOLKREG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random edge-colored complete multipartite host, or a random
    /// bounded-degree target graph.
    Gen(GenArgs),
    /// Build a regular partition of a host.
    Partition(PartitionArgs),
    /// Check one pair of vertex sets for regularity.
    CheckPair(CheckPairArgs),
    /// Write the reduced graph of a partition.
    Reduce(ReduceArgs),
    /// Print the transversal Turán bound.
    Turan(TuranArgs),
    /// Embed a target graph into explicit clusters.
    Embed(EmbedArgs),
    /// Run the whole pipeline.
    Folkman(FolkmanArgs),
    /// Re-check an embedding or a pipeline report against a host.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Host,
    Target,
}

#[derive(Clone, Copy, ValueEnum)]
enum Verdicts {
    Auto,
    Exhaustive,
    Sampled,
}

impl From<Verdicts> for VerdictMode {
    fn from(v: Verdicts) -> Self {
        match v {
            Verdicts::Auto => VerdictMode::Auto,
            Verdicts::Exhaustive => VerdictMode::Exhaustive,
            Verdicts::Sampled => VerdictMode::Sampled,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "host")]
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long, default_value_t = 8)]
    part_size: usize,
    #[arg(long, default_value_t = 2)]
    colors: usize,
    /// Target order (with `--kind target`).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Target maximum degree (with `--kind target`).
    #[arg(long, default_value_t = 3)]
    delta: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RegArgs {
    #[arg(long, value_parser = parse_density)]
    epsilon: Density,
    #[arg(long, default_value = "auto")]
    verdicts: Verdicts,
    #[arg(long, default_value_t = 32)]
    sample_trials: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    host: PathBuf,
    #[command(flatten)]
    reg: RegArgs,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    max_rounds: usize,
    #[arg(long, default_value_t = 1)]
    class_size_floor: usize,
    /// Preferred number of chunks per class in practical refinement.
    #[arg(long)]
    split: Option<usize>,
    /// Use the exact chunk arithmetic instead of practical splitting.
    #[arg(long)]
    faithful: bool,
    /// Merge exceptional vertices into the classes afterwards.
    #[arg(long)]
    absorb: bool,
    /// Also write the pair verdicts of the final partition here.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckPairArgs {
    #[arg(long)]
    host: PathBuf,
    /// Vertex list such as `0..8` or `0,3,5..9`; defaults to part 0.
    #[arg(long)]
    a: Option<String>,
    /// Defaults to part 1.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    color: Option<usize>,
    #[command(flatten)]
    reg: RegArgs,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[command(flatten)]
    reg: RegArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TuranArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// One vertex list per cluster, e.g. `--cluster 0..5 --cluster 5..10`.
    #[arg(long = "cluster", required = true)]
    clusters: Vec<String>,
    /// Embed into this color layer (default: the whole host graph).
    #[arg(long)]
    color: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, value_parser = parse_density)]
    epsilon: Density,
    #[arg(long, value_parser = parse_density, default_value = "1/2")]
    d_floor: Density,
    /// Pick candidates at random from this seed instead of lowest index.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FolkmanArgs {
    #[arg(long, default_value_t = 3)]
    delta: usize,
    #[arg(long, default_value_t = 6)]
    parts: usize,
    #[arg(long, default_value_t = 48)]
    part_size: usize,
    #[arg(long, default_value_t = 2)]
    colors: usize,
    /// Order of the random target graph.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_parser = parse_density, default_value = "1/10")]
    epsilon: Density,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Read the host from a file instead of generating it.
    #[arg(long)]
    host: Option<PathBuf>,
    /// Read the target graph from a file instead of generating it.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    faithful: bool,
    #[arg(long, default_value = "sampled")]
    verdicts: Verdicts,
    #[arg(long, default_value_t = 0)]
    sample_trials: usize,
    #[arg(long, default_value_t = 2)]
    max_rounds: usize,
    #[arg(long, default_value_t = 12)]
    class_size_floor: usize,
    #[arg(long, default_value_t = 8)]
    retries: usize,
    /// Enforce epsilon <= min(1/p^2, 1/m).
    #[arg(long)]
    paper_strict: bool,
    /// Print ms=0 in stage lines.
    #[arg(long)]
    no_timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    host: PathBuf,
    /// A `folkman` report.
    #[arg(long, conflicts_with_all = ["embedding", "target"])]
    report: Option<PathBuf>,
    /// An embedding file (needs `--target`).
    #[arg(long, requires = "target")]
    embedding: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    color: Option<usize>,
}

/// A failure with the exit status it maps to.
struct Failure {
    status: u8,
    msg: String,
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        status: 1,
        msg: msg.into(),
    }
}

fn lib(e: Error) -> Failure {
    usage(e.to_string())
}

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::Parse { line, msg } => usage(format!("{}:{line}: {msg}", path.display())),
        other => usage(format!("{}: {other}", path.display())),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_host(path: &Path) -> CliResult<PartiteHost> {
    PartiteHost::parse(&read(path)?).map_err(in_file(path))
}

fn read_graph(path: &Path) -> CliResult<DenseGraph> {
    DenseGraph::parse(&read(path)?).map_err(in_file(path))
}

fn parse_density(s: &str) -> std::result::Result<Density, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

fn parse_vertices(list: &str, n: usize) -> CliResult<VertexSet> {
    let bad = || usage(format!("bad vertex list {list:?}"));
    let mut set = VertexSet::empty(n);
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (lo, hi) = match item.split_once("..") {
            Some((lo, hi)) => (
                lo.parse::<usize>().map_err(|_| bad())?,
                hi.parse::<usize>().map_err(|_| bad())?,
            ),
            None => {
                let v = item.parse::<usize>().map_err(|_| bad())?;
                (v, v + 1)
            }
        };
        if hi > n {
            return Err(usage(format!("vertex list {list:?} leaves 0..{n}")));
        }
        for v in lo..hi {
            set.insert(v);
        }
    }
    Ok(set)
}

fn require_seed(seed: Option<u64>, why: &str) -> CliResult<u64> {
    seed.ok_or_else(|| usage(format!("--seed is required: {why}")))
}

fn params(reg: &RegArgs) -> CliResult<RegularityParams> {
    let mut p = RegularityParams::new(reg.epsilon).map_err(lib)?;
    p.verdicts = reg.verdicts.into();
    p.sample_trials = reg.sample_trials;
    p.seed = reg.seed.unwrap_or(0);
    Ok(p)
}

fn may_sample(reg: &RegArgs) -> bool {
    !matches!(reg.verdicts, Verdicts::Exhaustive)
}

fn run(cli: Cli) -> CliResult<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Gen(a) => {
            let text = match a.kind {
                Kind::Host => random_host(a.p, a.part_size, a.colors, a.seed)
                    .and_then(|h| h.to_text())
                    .map_err(lib)?,
                Kind::Target => random_bounded_degree_graph(a.n, a.delta, a.seed).to_text(),
            };
            write(&a.out, &text)?;
            Ok(0)
        }
        Command::Partition(a) => {
            let host = read_host(&a.host)?;
            if may_sample(&a.reg) {
                require_seed(a.reg.seed, "pair verdicts may be sampled")?;
            }
            let mut p = params(&a.reg)?;
            p.min_classes = a.m;
            p.max_rounds = a.max_rounds;
            p.class_size_floor = a.class_size_floor;
            p.split = a.split;
            if a.faithful {
                p.mode = RefineMode::Faithful;
            }
            p.validate().map_err(lib)?;
            let colors = all_colors(&host);
            let (mut partition, mut table, report) =
                iterate_to_regular(&host, &p, &colors).map_err(lib)?;
            if a.absorb {
                partition = absorb_exceptional(&partition);
                table = assess_pairs(&host, &partition, &p, &colors).map_err(lib)?;
            }
            let q = index(&host, &partition, None).map_err(lib)?;
            write(&a.out, &partition.to_text(&p.epsilon, &q))?;
            if let Some(path) = &a.pairs {
                write(path, &(table.to_lines().join("\n") + "\n"))?;
            }
            for line in report.to_lines() {
                println!("{line}");
            }
            Ok(0)
        }
        Command::CheckPair(a) => {
            let host = read_host(&a.host)?;
            let set = |list: &Option<String>, s: usize| match list {
                Some(list) => parse_vertices(list, host.n()),
                None => Ok(host.part_set(s)),
            };
            let (x, y) = (set(&a.a, 0)?, set(&a.b, 1)?);
            let (Some(fx), Some(fy)) = (x.first(), y.first()) else {
                return Err(usage("vertex sets must be nonempty"));
            };
            let p = params(&a.reg)?;
            let cap_fits = x.len() <= p.exhaustive_cap && y.len() <= p.exhaustive_cap;
            let samples = match a.reg.verdicts {
                Verdicts::Exhaustive => false,
                Verdicts::Sampled => true,
                Verdicts::Auto => !cap_fits,
            };
            if samples {
                require_seed(a.reg.seed, "this pair is checked by sampling")?;
            }
            let g = host.layer(a.color).map_err(lib)?;
            let stats = check_pair(g, &x, &y, &p, p.seed).map_err(lib)?;
            let rec = PairRecord {
                s: host.part_of(fx),
                i: 1,
                t: host.part_of(fy),
                j: 1,
                color: a.color.unwrap_or(0),
                stats,
            };
            println!("{}", rec.to_line());
            Ok(0)
        }
        Command::Reduce(a) => {
            let host = read_host(&a.host)?;
            let (partition, _, _) = Partition::parse(&read(&a.partition)?, &host).map_err(in_file(&a.partition))?;
            if may_sample(&a.reg) {
                require_seed(a.reg.seed, "pair verdicts may be sampled")?;
            }
            let p = params(&a.reg)?;
            let f = folkreg::harness::reduced_graph_for(&host, &partition, &p).map_err(lib)?;
            write(&a.out, &f.to_text())?;
            println!("edges={}", f.edge_count());
            Ok(0)
        }
        Command::Turan(a) => {
            if a.p < 2 || a.k < 1 {
                return Err(usage("turan needs p >= 2 and k >= 1"));
            }
            let bound = turan_bound(a.p, a.k);
            println!("bound={bound}");
            if a.oracle {
                let oracle = max_kp_free_oracle(a.p as usize, a.k as usize).map_err(lib)?;
                println!("oracle={oracle} agree={}", oracle == bound);
            }
            Ok(0)
        }
        Command::Embed(a) => {
            let host = read_host(&a.host)?;
            let graph = read_graph(&a.target)?;
            let clusters = a
                .clusters
                .iter()
                .map(|c| parse_vertices(c, host.n()))
                .collect::<CliResult<Vec<_>>>()?;
            let delta = a.delta.unwrap_or(clusters.len());
            let target = TargetGraph::new(graph, delta).map_err(lib)?;
            let g = match a.color {
                Some(c) => monochrome_subgraph(&host, c).map_err(lib)?,
                None => host.graph().clone(),
            };
            let opts = EmbedOptions {
                choice: a.seed.map_or(Choice::Lowest, Choice::Random),
                certified: false,
            };
            let out = embed(&target, &g, &clusters, &a.epsilon, &a.d_floor, opts).map_err(lib)?;
            let (text, status) = match out {
                EmbedOutcome::Success(state) => (state.to_text(), 0),
                EmbedOutcome::Failure(trace) => (trace.to_line() + "\n", 2),
            };
            match &a.out {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
            Ok(status)
        }
        Command::Folkman(a) => {
            let host = match &a.host {
                Some(path) => read_host(path)?,
                None => random_host(a.parts, a.part_size, a.colors, a.seed).map_err(lib)?,
            };
            let target = match &a.target {
                Some(path) => read_graph(path)?,
                None => random_bounded_degree_graph(a.n, a.delta, a.seed),
            };
            let mut cfg = PipelineConfig::new(a.delta, a.colors, a.parts, a.part_size, a.epsilon, a.seed);
            cfg.m = a.m;
            cfg.mode = if a.faithful {
                RefineMode::Faithful
            } else {
                RefineMode::Practical
            };
            cfg.verdicts = a.verdicts.into();
            cfg.sample_trials = a.sample_trials;
            cfg.max_rounds = a.max_rounds;
            cfg.class_size_floor = a.class_size_floor;
            cfg.retries = a.retries;
            cfg.paper_strict = a.paper_strict;
            let report = run_pipeline(&host, &target, &cfg).map_err(lib)?;
            let text = report.to_text(!a.no_timings);
            match &a.out {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
            println!("success={}", report.success);
            Ok(if report.success { 0 } else { 2 })
        }
        Command::Verify(a) => {
            let host = read_host(&a.host)?;
            let (target, state, color) = if let Some(path) = &a.report {
                let summary = parse_report(&read(path)?, host.n()).map_err(in_file(path))?;
                let (Some(target), Some(state)) = (summary.target, summary.embedding) else {
                    println!("verified=false");
                    return Ok(2);
                };
                (target, state, a.color.or(summary.color))
            } else {
                let (Some(emb), Some(tg)) = (&a.embedding, &a.target) else {
                    return Err(usage("verify needs --report, or --embedding with --target"));
                };
                let state = EmbeddingState::parse(&read(emb)?, host.n()).map_err(in_file(emb))?;
                (read_graph(tg)?, state, a.color)
            };
            let g = match color {
                Some(c) => monochrome_subgraph(&host, c).map_err(lib)?,
                None => host.graph().clone(),
            };
            let ok = verify_embedding(&target, &state, &g).map_err(lib)?;
            println!("verified={ok}");
            Ok(if ok { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(status);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.status)
        }
    }
}
