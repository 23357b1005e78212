use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mpcmm::suites::{run_suite, Suite, SuiteOptions, SuiteReport};
use mpcmm::sweep::{fit_sweep, run_sweep, SweepConfig, SweepFamily, SweepFits, CSV_COLUMNS};
use mpcmm::{load_graph, maximal_matching_driver, verify_matching, DriverMode, Graph, GraphSpec, PhaseConfig};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed_2019;
/// Environment variable that sizes the worker pool.
pub const WORKERS_ENV: &str = "MPCMM_WORKERS";
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "mpcmm", version, about = "Massively-parallel maximal matching simulator")]
struct Cli {
    /// Worker threads (overrides MPCMM_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the phase driver on one graph and verify the result.
    Match(MatchArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Degree sweep at fixed n; writes one CSV row per (degree, seed).
    Sweep(SweepArgs),
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Generator spec: erdos-renyi:N,AVG | random-regular:N,D | star:D | path:N | complete:N
    #[arg(long = "gen", value_name = "SPEC")]
    generator: Option<String>,
    /// Edge-list file ("u v" per line, '#' comments).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Loglog,
    ConstantDelta,
}

#[derive(Args)]
struct PhaseOverrides {
    /// JSON file with phase parameters; missing fields keep their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    p_exponent: Option<f64>,
    #[arg(long)]
    k_exponent: Option<f64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    terminal_degree: Option<usize>,
    #[arg(long)]
    space_constant: Option<f64>,
}

impl PhaseOverrides {
    fn resolve(&self) -> Result<PhaseConfig> {
        let mut cfg: PhaseConfig = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
            None => PhaseConfig::default(),
        };
        if let Some(x) = self.p_exponent {
            cfg.p_exponent = x;
        }
        if let Some(x) = self.k_exponent {
            cfg.k_exponent = x;
        }
        if let Some(x) = self.repetitions {
            cfg.repetitions = x;
        }
        if let Some(x) = self.terminal_degree {
            cfg.terminal_degree = x;
        }
        if let Some(x) = self.space_constant {
            cfg.space_constant = x;
        }
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "loglog")]
    mode: Mode,
    /// Exponent for constant-delta mode: phases stop once Δ <= n^delta.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    phase: PhaseOverrides,
    /// Summary JSON destination (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Matching JSON destination.
    #[arg(long, value_name = "PATH")]
    matching_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    /// lipschitz | tails | oracle-equivalence | efron-stein | query-complexity | survivors | vertex-cover
    suite: String,
    /// Main trial count of the suite (suite default if omitted).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RandomRegular,
    ErdosRenyi,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "random-regular")]
    family: Family,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Partitioned runs per row for the survivor census.
    #[arg(long, default_value_t = 8)]
    census_trials: usize,
    #[arg(long, value_enum, default_value = "loglog")]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    phase: PhaseOverrides,
    /// CSV destination (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// JSON destination for per-degree medians and fitted slopes.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    spec: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Errors that map to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn emit(dest: Option<&Path>, body: &str) -> Result<()> {
    match dest {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn driver_mode(mode: Mode, delta: f64) -> Result<DriverMode> {
    match mode {
        Mode::Loglog => Ok(DriverMode::LogLog),
        Mode::ConstantDelta if delta > 0.0 && delta < 1.0 => Ok(DriverMode::ConstantDelta { delta }),
        Mode::ConstantDelta => Err(usage(format!("--delta must lie in (0, 1), got {delta}"))),
    }
}

fn load_source(src: &Source, seed: u64) -> Result<(String, Graph)> {
    if let Some(spec) = &src.generator {
        let spec: GraphSpec = spec.parse().map_err(|e: mpcmm::Error| usage(e.to_string()))?;
        let g = spec.generate(seed).map_err(|e| usage(e.to_string()))?;
        Ok((spec.to_string(), g))
    } else {
        let p = src.input.as_ref().expect("clap enforces one source");
        let g = load_graph(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        Ok((p.display().to_string(), g))
    }
}

#[derive(Serialize)]
struct MatchOutput<'a> {
    schema_version: u32,
    source: String,
    config: &'a PhaseConfig,
    summary: mpcmm::DriverSummary,
}

#[derive(Serialize)]
struct MatchingFile {
    schema_version: u32,
    seed: u64,
    n: usize,
    /// Edge ids into the lexicographically sorted edge list.
    edges: Vec<usize>,
    /// Endpoints of each matched edge, as original vertex labels.
    pairs: Vec<(u64, u64)>,
}

/// Returns whether the emitted matching verified.
fn cmd_match(a: &MatchArgs) -> Result<bool> {
    let cfg = a.phase.resolve()?;
    let mode = driver_mode(a.mode, a.delta)?;
    let (source, g) = load_source(&a.source, a.seed)?;
    let (m, summary) = maximal_matching_driver(&g, &cfg, mode, a.seed).context("driver failed")?;
    let check = verify_matching(&g, &m);
    if let Some(p) = &a.matching_out {
        let edges = m.edge_set();
        let pairs = edges
            .iter()
            .map(|&e| {
                let (u, v) = g.endpoints(e);
                (g.label(u), g.label(v))
            })
            .collect();
        let file = MatchingFile {
            schema_version: SCHEMA_VERSION,
            seed: a.seed,
            n: g.n(),
            edges,
            pairs,
        };
        emit(Some(p), &to_json(&file)?)?;
    }
    let out = MatchOutput {
        schema_version: SCHEMA_VERSION,
        source,
        config: &cfg,
        summary,
    };
    emit(a.output.as_deref(), &to_json(&out)?)?;
    if !(check.valid && check.maximal) {
        eprintln!("matching failed verification: {:?}", check.violation);
    }
    Ok(check.valid && check.maximal)
}

fn suite_csv(r: &SuiteReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "check", "passed", "observed", "bound", "detail"])?;
    for c in &r.checks {
        w.write_record([
            r.suite.name().to_string(),
            c.name.clone(),
            c.passed.to_string(),
            c.observed.to_string(),
            c.bound.to_string(),
            c.detail.clone(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!(
        "# seed={} instances={} passed={}\n{body}",
        r.seed, r.instances, r.passed
    ))
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let suite: Suite = a.suite.parse().map_err(|e: mpcmm::Error| usage(e.to_string()))?;
    if let Some(b) = a.beta {
        if !(b > 0.0 && b < 1.0) {
            return Err(usage(format!("--beta must lie in (0, 1), got {b}")));
        }
    }
    if let Some(p) = a.p {
        if !(p > 0.0 && p <= 1.0) {
            return Err(usage(format!("--p must lie in (0, 1], got {p}")));
        }
    }
    let opts = SuiteOptions {
        seed: a.seed,
        trials: a.trials,
        beta: a.beta,
        p: a.p,
    };
    let report = run_suite(suite, &opts)?;
    let body = match a.format {
        Format::Json => to_json(&report)?,
        Format::Csv => suite_csv(&report)?,
    };
    emit(a.output.as_deref(), &body)?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAIL {}: observed {} against {} ({})",
            c.name, c.observed, c.bound, c.detail
        );
    }
    Ok(report.passed)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    schema_version: u32,
    config: &'a SweepConfig,
    fits: SweepFits,
}

fn cmd_sweep(a: &SweepArgs) -> Result<bool> {
    let family = match a.family {
        Family::RandomRegular => SweepFamily::RandomRegular,
        Family::ErdosRenyi => SweepFamily::ErdosRenyi,
    };
    let mut cfg = SweepConfig::new(family, a.n, a.degrees.clone(), a.seeds, a.seed);
    cfg.census_trials = a.census_trials;
    cfg.phase = a.phase.resolve()?;
    cfg.mode = driver_mode(a.mode, a.delta)?;
    if a.seeds == 0 || a.degrees.is_empty() || a.census_trials == 0 {
        return Err(usage(
            "a sweep needs at least one degree, one seed and one census trial",
        ));
    }
    let rows = run_sweep(&cfg).map_err(|e| match e {
        mpcmm::Error::Config(_) => usage(e.to_string()),
        e => anyhow::Error::new(e),
    })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    emit(
        a.output.as_deref(),
        &format!("# seed={} family={:?} n={}\n{body}", a.seed, family, a.n),
    )?;
    if let Some(p) = &a.summary {
        let s = SweepSummary {
            schema_version: SCHEMA_VERSION,
            config: &cfg,
            fits: fit_sweep(&rows),
        };
        emit(Some(p), &to_json(&s)?)?;
    }
    Ok(rows.iter().all(|r| r.maximal))
}

fn cmd_gen(a: &GenArgs) -> Result<bool> {
    let spec: GraphSpec = a.spec.parse().map_err(|e: mpcmm::Error| usage(e.to_string()))?;
    let g = spec.generate(a.seed).map_err(|e| usage(e.to_string()))?;
    let body = format!("# {spec} seed={} n={} m={}\n{}", a.seed, g.n(), g.m(), g.to_edge_list());
    emit(a.output.as_deref(), &body)?;
    Ok(true)
}

fn workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(k) = workers(cli.workers)? {
        if k == 0 {
            return Err(usage("worker count must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    match &cli.command {
        Command::Match(a) => cmd_match(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run `mpcmm --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
