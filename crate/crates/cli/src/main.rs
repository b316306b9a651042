//! `fkc`: streaming fair k-center clustering from the command line.

mod bench;
mod ingest;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fair_kcenter::ladder::Solver;
use fair_kcenter::metric::CostAccumulator;
use fair_kcenter::{
    brute_force_opt_with, generate_planted, CenterSet, Euclidean, FairnessSpec, Ladder, Metric,
    Mode, OracleLimits, PlantedConfig, SolveOutcome,
};
use serde::Serialize;
use thiserror::Error;

use crate::ingest::{Column, Ingest, IngestError, IngestOptions};
use crate::report::{centers_out, ErrorReport, Instances, PlantedReport, RunReport};

#[derive(Debug, Parser)]
#[command(name = "fkc", version, about = "Streaming fair k-center clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One pass over a stream in any order, guessing the radius.
    Solve(SolveArgs),
    /// One pass over a stream that lists every group-1 point first.
    Semi(SolveArgs),
    /// One pass at a given radius.
    Known(KnownArgs),
    /// Exact optimum by exhaustive search (small inputs only).
    Oracle(OracleArgs),
    /// Write a synthetic dataset whose optimum is known.
    Gen(GenArgs),
    /// Compare the solvers against baselines and known optima.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl MetricKind {
    fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Manhattan => "manhattan",
            MetricKind::Chebyshev => "chebyshev",
        }
    }
}

impl Metric for MetricKind {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            MetricKind::Euclidean => Euclidean.distance(a, b),
            MetricKind::Manhattan => diffs.sum(),
            MetricKind::Chebyshev => diffs.fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row; `-` reads standard input.
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = MetricKind::Euclidean)]
    metric: MetricKind,
    /// Group column, by header name or zero-based index.
    #[arg(long, default_value = "group")]
    group_col: String,
    /// Optional column of non-negative integer ids; otherwise ids count rows from 0.
    #[arg(long)]
    id_col: Option<String>,
    /// Group labels in cap order; by default labels are numbered by first appearance.
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<String>>,
}

impl InputArgs {
    fn options(&self, max_groups: usize, group_sorted: bool) -> IngestOptions {
        IngestOptions {
            input: self.input.clone(),
            group_col: Column::parse(&self.group_col),
            id_col: self.id_col.as_deref().map(Column::parse),
            groups: self.groups.clone(),
            max_groups,
            group_sorted,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CapsArgs {
    /// Per-group center caps, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    caps: Vec<usize>,
    /// Total number of centers; must equal the sum of the caps.
    #[arg(long)]
    k: Option<usize>,
}

impl CapsArgs {
    pub fn spec(&self) -> Result<FairnessSpec, Failure> {
        let spec = FairnessSpec::new(self.caps.clone())?;
        match self.k {
            Some(k) if k != spec.k() => Err(Failure::Usage(format!(
                "--k {k} does not match the caps, which sum to {}",
                spec.k()
            ))),
            _ => Ok(spec),
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    caps: CapsArgs,
    /// Ratio between consecutive radius guesses is 1 + epsilon.
    #[arg(long, default_value_t = Ladder::<Euclidean>::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Skip the second pass that measures the cost.
    #[arg(long)]
    no_replay: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KnownArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    caps: CapsArgs,
    #[arg(long)]
    radius: f64,
    /// Use the solver for group-sorted streams.
    #[arg(long)]
    semi: bool,
    #[arg(long)]
    no_replay: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    caps: CapsArgs,
    #[arg(long, default_value_t = OracleLimits::default().max_n)]
    max_n: usize,
    #[arg(long, default_value_t = OracleLimits::default().max_k)]
    max_k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    caps: CapsArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    planted_radius: f64,
    #[arg(long, default_value_t = PlantedConfig::DEFAULT_SEPARATION)]
    separation: f64,
    #[arg(long, default_value_t = PlantedConfig::DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; the summary goes to standard output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Solver(#[from] fair_kcenter::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Ingest(_) => "input",
            Failure::Solver(fair_kcenter::Error::Infeasible(_)) => "infeasible",
            Failure::Solver(fair_kcenter::Error::Empty(_)) => "input",
            Failure::Solver(_) => "solver",
            Failure::Usage(_) => "usage",
            Failure::Write { .. } | Failure::Csv(_) | Failure::Json(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Solver(fair_kcenter::Error::Infeasible(_)) => 1,
            _ => 2,
        }
    }

    fn line(&self) -> Option<u64> {
        match self {
            Failure::Ingest(e) => e.line(),
            _ => None,
        }
    }
}

fn write_failure(path: &Path, source: io::Error) -> Failure {
    Failure::Write {
        path: path.display().to_string(),
        source,
    }
}

pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| write_failure(path, e))?;
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w).and_then(|_| w.flush()).map_err(|e| write_failure(path, e))
        }
        None => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w).map_err(|e| write_failure(Path::new("<stdout>"), e))
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Second pass over a file input; `None` for standard input or when disabled.
fn replay_cost(
    input: &InputArgs,
    centers: &CenterSet,
    m: usize,
    skip: bool,
) -> Result<Option<f64>, Failure> {
    if skip || input.input == "-" {
        return Ok(None);
    }
    let mut ingest = Ingest::open(&input.options(m, false))?;
    let mut acc = CostAccumulator::new(centers, &input.metric)?;
    while let Some(p) = ingest.next_point()? {
        acc.observe(&p)?;
    }
    Ok(Some(acc.finish()?))
}

fn solve(args: &SolveArgs, mode: Mode) -> Result<(), Failure> {
    let start = Instant::now();
    let spec = args.caps.spec()?;
    let mut ingest = Ingest::open(&args.input.options(spec.groups(), mode == Mode::Semi))?;
    let mut ladder = Ladder::new(spec.clone(), mode, args.epsilon, args.input.metric)?;
    while let Some(p) = ingest.next_point()? {
        ladder.observe(&p)?;
    }
    let result = ladder.finish()?;
    let cost = replay_cost(&args.input, &result.centers, spec.groups(), args.no_replay)?;
    let stats = result.stats;
    let report = RunReport {
        schema: report::REPORT_SCHEMA,
        mode: match mode {
            Mode::General => "general",
            Mode::Semi => "semi",
        },
        metric: args.input.metric.name(),
        r_hat: result.best_guess,
        epsilon: Some(args.epsilon),
        k: spec.k(),
        caps: spec.caps().to_vec(),
        group_labels: ingest.labels().to_vec(),
        n_points: stats.points,
        centers: centers_out(&result.centers, ingest.labels()),
        per_group_counts: result.centers.per_group_counts().to_vec(),
        cost,
        points_stored_peak: stats.peak_stored_per_instance,
        points_stored_peak_total: stats.peak_stored_total,
        distance_evals: stats.distance_evals,
        instances: Some(Instances::from(&stats)),
        subsets_evaluated: None,
        wall_time_ms: elapsed_ms(start),
    };
    emit(&report, args.out.as_deref())
}

fn known(args: &KnownArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let spec = args.caps.spec()?;
    let mode = if args.semi { Mode::Semi } else { Mode::General };
    let mut ingest = Ingest::open(&args.input.options(spec.groups(), args.semi))?;
    let mut solver = Solver::new(mode, args.radius, spec.clone())?;
    let mut n = 0u64;
    while let Some(p) = ingest.next_point()? {
        solver.process(&p, &args.input.metric)?;
        n += 1;
    }
    if n == 0 {
        return Err(fair_kcenter::Error::Empty("point stream").into());
    }
    let centers = match solver.finalize(&args.input.metric) {
        SolveOutcome::Feasible(c) => c,
        SolveOutcome::Infeasible(why) => {
            return Err(fair_kcenter::Error::Infeasible(format!(
                "radius {} is too small ({why:?})",
                args.radius
            ))
            .into())
        }
    };
    let cost = replay_cost(&args.input, &centers, spec.groups(), args.no_replay)?;
    let report = RunReport {
        schema: report::REPORT_SCHEMA,
        mode: if args.semi { "known-semi" } else { "known" },
        metric: args.input.metric.name(),
        r_hat: args.radius,
        epsilon: None,
        k: spec.k(),
        caps: spec.caps().to_vec(),
        group_labels: ingest.labels().to_vec(),
        n_points: n,
        centers: centers_out(&centers, ingest.labels()),
        per_group_counts: centers.per_group_counts().to_vec(),
        cost,
        points_stored_peak: solver.peak_stored(),
        points_stored_peak_total: solver.peak_stored(),
        distance_evals: solver.update_stats().distance_evals,
        instances: None,
        subsets_evaluated: None,
        wall_time_ms: elapsed_ms(start),
    };
    emit(&report, args.out.as_deref())
}

fn oracle(args: &OracleArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let spec = args.caps.spec()?;
    let mut ingest = Ingest::open(&args.input.options(spec.groups(), false))?;
    let points = ingest.collect()?;
    let limits = OracleLimits {
        max_n: args.max_n,
        max_k: args.max_k,
    };
    let result = brute_force_opt_with(&points, &spec, &args.input.metric, limits)?;
    let report = RunReport {
        schema: report::REPORT_SCHEMA,
        mode: "oracle",
        metric: args.input.metric.name(),
        r_hat: result.r_opt,
        epsilon: None,
        k: spec.k(),
        caps: spec.caps().to_vec(),
        group_labels: ingest.labels().to_vec(),
        n_points: points.len() as u64,
        centers: centers_out(&result.optimal_centers, ingest.labels()),
        per_group_counts: result.optimal_centers.per_group_counts().to_vec(),
        cost: Some(result.r_opt),
        points_stored_peak: points.len(),
        points_stored_peak_total: points.len(),
        distance_evals: (points.len() * points.len()) as u64,
        instances: None,
        subsets_evaluated: Some(result.evaluated),
        wall_time_ms: elapsed_ms(start),
    };
    emit(&report, args.out.as_deref())
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = args.caps.spec()?;
    let cfg = PlantedConfig::new(spec.clone(), args.n, args.planted_radius, args.seed)
        .with_separation(args.separation)
        .with_dim(args.dim);
    let data = generate_planted(&cfg)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    let mut header: Vec<String> = (0..args.dim).map(|i| format!("x{i}")).collect();
    header.push("group".into());
    w.write_record(&header)?;
    for p in data.points.points() {
        let mut row: Vec<String> = p.coords.iter().map(f64::to_string).collect();
        row.push(p.group.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| write_failure(&args.out, e))?;
    let report = PlantedReport {
        schema: report::PLANTED_SCHEMA,
        out: args.out.display().to_string(),
        seed: data.seed,
        n: args.n,
        k: spec.k(),
        caps: spec.caps().to_vec(),
        dim: args.dim,
        separation: args.separation,
        planted_r: data.planted_r,
        planted_center_ids: data.planted_centers.ids(),
    };
    emit(&report, None)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve(a) => solve(a, Mode::General),
        Command::Semi(a) => solve(a, Mode::Semi),
        Command::Known(a) => known(a),
        Command::Oracle(a) => oracle(a),
        Command::Gen(a) => gen(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                schema: report::ERROR_SCHEMA,
                kind: e.kind(),
                message: e.to_string(),
                line: e.line(),
            };
            let json = serde_json::to_string(&report).unwrap_or_else(|_| e.to_string());
            eprintln!("{json}");
            ExitCode::from(e.exit_code())
        }
    }
}
