use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use deccon::bench::{run_cell, write_csv, write_trace, BenchConfig, BenchRecord, VerifyLevel};
use deccon::certificate::{BoundaryBackend, CertificateParams, DeltaRule};
use deccon::gen::GraphSpec;
use deccon::io::{parse_deletions, parse_edge_list};
use deccon::matching::{unique_perfect_matching, MatchingConfig, MatchingVerdict};
use deccon::replay::verify_replay;
use deccon::{EdgeId, Vertex};

#[derive(Parser)]
#[command(name = "deccon", version, about = "Decremental connectivity benchmark and verification harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run seeded deletion sequences and emit one CSV row per seed.
    Run(RunArgs),
    /// Replay an event log against recomputation.
    Verify(VerifyArgs),
    /// Decide whether a graph has a unique perfect matching.
    Matching(MatchingArgs),
    /// Self-check pass rate over many seeds.
    SelftestStats(StatsArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge list file: "n m" then m lines "u v".
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// gnm | gnp | dumbbell | grid | critical
    #[arg(long)]
    gen: Option<String>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Edge count for gnm (default 4n).
    #[arg(long)]
    m: Option<usize>,
    /// Edge probability for gnp.
    #[arg(long)]
    edge_p: Option<f64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Preset {
    /// ℓ = ⌈z·log₂ n⌉, p = 1/log₂³ n, pδ ≥ 32c, q = 1/log₂² n.
    Calibrated,
    /// Small constants that exercise every mechanism at small n.
    Desk,
}

#[derive(Copy, Clone, ValueEnum)]
enum Backend {
    Sketch,
    Exact,
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long, value_enum, default_value = "calibrated")]
    preset: Preset,
    /// Level multiplier z for the calibrated preset.
    #[arg(long, default_value_t = 4.0)]
    z: f64,
    /// Use pδ ≥ 12c instead of 32c for the calibrated preset.
    #[arg(long)]
    loose_delta: bool,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    gamma: Option<u32>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    no_fallback: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    c: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// none | checkpoints | every-step
    #[arg(long, default_value = "none")]
    verify: String,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Event log of the first seed.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Certificate size after every step, per seed.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Deletion file: edge ids one per line, or "shuffle <seed>".
    #[arg(long)]
    deletions: Option<PathBuf>,
    #[arg(long)]
    limit: Option<usize>,
    /// Add wall-clock columns.
    #[arg(long)]
    timing: bool,
    /// Drop a necessary certificate edge at this step.
    #[arg(long)]
    inject_at: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    deletions: PathBuf,
    #[arg(long)]
    log: PathBuf,
}

#[derive(Args)]
struct MatchingArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    max_attempts: u32,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    c: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
}

fn load_graph(args: &GraphArgs, seed: u64) -> Result<(usize, Vec<(Vertex, Vertex)>)> {
    match (&args.graph, &args.gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_edge_list(&text)?)
        }
        (None, Some(name)) => Ok(GraphSpec::from_name(name, args.n, args.m, args.edge_p)?.generate(seed)?),
        _ => bail!("give exactly one of --graph FILE or --gen NAME"),
    }
}

fn build_params(args: &ParamArgs, n: usize, c: u32) -> Result<CertificateParams> {
    let mut p = match args.preset {
        Preset::Calibrated => {
            let rule = if args.loose_delta { DeltaRule::Loose } else { DeltaRule::Strict };
            CertificateParams::calibrated_with(n, c, args.z, rule)
        }
        Preset::Desk => CertificateParams::desk(c),
    };
    if let Some(x) = args.p {
        p.p = x;
    }
    if let Some(x) = args.delta {
        p.delta = x;
    }
    if let Some(x) = args.ell {
        p.ell = x;
    }
    if let Some(x) = args.q {
        p.q = x;
    }
    if let Some(x) = args.gamma {
        p.gamma = x;
    }
    if let Some(b) = args.backend {
        p.backend = match b {
            Backend::Sketch => BoundaryBackend::Sketch,
            Backend::Exact => BoundaryBackend::Exact,
        };
    }
    if args.no_fallback {
        p.fallback = false;
    }
    p.validate()?;
    Ok(p)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(a: RunArgs) -> Result<u8> {
    if !(1..=3).contains(&a.c) {
        bail!("--c must be 1, 2 or 3");
    }
    let verify: VerifyLevel = a.verify.parse()?;
    let explicit = match &a.deletions {
        Some(path) => Some(parse_deletions(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?),
        None => None,
    };
    let mut records: Vec<BenchRecord> = Vec::new();
    for seed in a.seed..a.seed + a.seeds {
        let (n, pairs) = load_graph(&a.graph, seed)?;
        let mut cfg = BenchConfig::new(a.c, build_params(&a.params, n, a.c)?);
        cfg.verify = verify;
        cfg.timing = a.timing;
        cfg.limit = a.limit;
        cfg.inject_at = a.inject_at;
        cfg.log = a.log.is_some() && records.is_empty();
        cfg.deletions = explicit.as_ref().map(|d| d.resolve(pairs.len())).transpose()?;
        records.push(run_cell(n, &pairs, &cfg, seed)?);
    }
    if let (Some(path), Some(lines)) = (&a.log, records.first().and_then(|r| r.log.as_ref())) {
        let mut text = lines.join("\n");
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.trace {
        write_trace(output(Some(path))?, &records)?;
    }
    write_csv(output(a.csv.as_deref())?, &records, a.timing)?;
    let mut code = 0;
    for r in &records {
        if r.verified_wrong() {
            eprintln!("seed {}: self-check passed but {} verified steps disagreed, first at step {:?}", r.seed, r.mismatches, r.first_mismatch);
            code = 1;
        }
        if !r.churn_ok() {
            eprintln!("seed {}: boundary pruning removed {} edges on one level, bound {}", r.seed, r.churn_max, r.churn_bound);
            code = 1;
        }
        if !r.split_mass_ok() {
            eprintln!("seed {}: split mass {} exceeds {}", r.seed, r.split_mass, r.split_mass_bound);
            code = 1;
        }
    }
    Ok(code)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let read = |p: &Path| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let (n, pairs) = parse_edge_list(&read(&a.graph)?)?;
    let dels: Vec<EdgeId> = parse_deletions(&read(&a.deletions)?)?.resolve(pairs.len())?;
    let verdict = verify_replay(&read(&a.log)?, n, &pairs, &dels)?;
    for m in &verdict.mismatches {
        println!("{m}");
    }
    if verdict.ok() {
        println!("ok steps={}", verdict.steps);
        Ok(0)
    } else {
        Ok(1)
    }
}

fn cmd_matching(a: MatchingArgs) -> Result<u8> {
    let (n, pairs) = load_graph(&a.graph, a.seed)?;
    let cfg = MatchingConfig { params: Some(build_params(&a.params, n, 2)?), seed: a.seed, max_attempts: a.max_attempts };
    let out = unique_perfect_matching(n, &pairs, &cfg)?;
    match &out.verdict {
        MatchingVerdict::Unique(edges) => {
            let ids: Vec<String> = edges.iter().map(|e| e.0.to_string()).collect();
            println!("unique {}", ids.join(" "));
        }
        MatchingVerdict::NotUnique => println!("not-unique"),
        MatchingVerdict::NoPerfectMatching => println!("no-perfect-matching"),
    }
    eprintln!("attempts={} deletions={}", out.attempts, out.deletions);
    Ok(0)
}

fn cmd_stats(a: StatsArgs) -> Result<u8> {
    if !(1..=3).contains(&a.c) {
        bail!("--c must be 1, 2 or 3");
    }
    let mut passed = 0u64;
    let mut fallback = 0u64;
    for seed in a.seed..a.seed + a.seeds {
        let (n, pairs) = load_graph(&a.graph, seed)?;
        let cfg = BenchConfig::new(a.c, build_params(&a.params, n, a.c)?);
        let r = run_cell(n, &pairs, &cfg, seed)?;
        if r.passed {
            passed += 1;
        } else if let Some(f) = &r.check.failure {
            eprintln!("seed {seed}: {:?} on edge {} at update {}", f.kind, f.edge.0, f.update);
        }
        fallback += u64::from(r.fallback_edges > 0);
    }
    println!("runs={} passed={} rate={:.4} runs_with_fallback={fallback}", a.seeds, passed, passed as f64 / a.seeds.max(1) as f64);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Matching(a) => cmd_matching(a),
        Cmd::SelftestStats(a) => cmd_stats(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
