//! `fkc bench`: solver costs next to the farthest-first baseline and, when
//! available, the exact or planted optimum.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use fair_kcenter::{
    brute_force_opt, check_fairness, clustering_cost, generate_planted, gonzalez, FairnessSpec,
    Ladder, Mode, OracleLimits, PlantedConfig, Point,
};

use crate::ingest::Ingest;
use crate::report::{BenchRow, BENCH_SCHEMA};
use crate::{emit, CapsArgs, Failure, InputArgs, MetricKind};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// CSV datasets to benchmark (repeatable). Without any, planted datasets are generated.
    #[arg(long = "input")]
    inputs: Vec<String>,
    #[arg(long, value_enum, default_value_t = MetricKind::Euclidean)]
    metric: MetricKind,
    #[arg(long, default_value = "group")]
    group_col: String,
    #[arg(long)]
    id_col: Option<String>,
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<String>>,
    #[command(flatten)]
    caps: CapsArgs,
    /// Planted dataset sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 2000])]
    sizes: Vec<usize>,
    /// Planted datasets per size.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 1.0)]
    planted_radius: f64,
    #[arg(long, default_value_t = PlantedConfig::DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Ladder::<MetricKind>::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Write the rows here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Dataset {
    name: String,
    points: Vec<Point>,
    reference: Option<f64>,
}

pub fn run(args: &BenchArgs) -> Result<(), Failure> {
    let spec = args.caps.spec()?;
    let mut datasets = Vec::new();
    for input in &args.inputs {
        let opts = InputArgs {
            input: input.clone(),
            metric: args.metric,
            group_col: args.group_col.clone(),
            id_col: args.id_col.clone(),
            groups: args.groups.clone(),
        }
        .options(spec.groups(), false);
        let points = Ingest::open(&opts)?.collect()?;
        datasets.push(Dataset {
            name: input.clone(),
            points,
            reference: None,
        });
    }
    if args.inputs.is_empty() {
        for &n in &args.sizes {
            for rep in 0..args.reps {
                let seed = args.seed + rep;
                let cfg = PlantedConfig::new(spec.clone(), n, args.planted_radius, seed)
                    .with_dim(args.dim);
                let data = generate_planted(&cfg)?;
                datasets.push(Dataset {
                    name: format!("planted-n{n}-seed{seed}"),
                    points: data.points.into_points(),
                    reference: Some(data.planted_r),
                });
            }
        }
    }
    let mut rows = Vec::new();
    for d in &datasets {
        bench_dataset(d, &spec, args, &mut rows)?;
    }
    emit(&rows, args.out.as_deref())
}

fn bench_dataset(
    d: &Dataset,
    spec: &FairnessSpec,
    args: &BenchArgs,
    rows: &mut Vec<BenchRow>,
) -> Result<(), Failure> {
    let metric = &args.metric;
    let limits = OracleLimits::default();
    let mut reference = d.reference;
    let mut pending = Vec::new();

    if d.points.len() <= limits.max_n && spec.k() <= limits.max_k {
        let start = Instant::now();
        let found = brute_force_opt(&d.points, spec, metric);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let cost = found.as_ref().ok().map(|r| r.r_opt);
        reference = reference.or(cost);
        pending.push(("brute-force", cost, cost.is_some(), ms));
    }

    for (name, mode) in [("ladder-general", Mode::General), ("ladder-semi", Mode::Semi)] {
        let stream = match mode {
            Mode::General => d.points.clone(),
            Mode::Semi => {
                let mut s = d.points.clone();
                s.sort_by_key(|p| p.group);
                s
            }
        };
        let start = Instant::now();
        let mut ladder = Ladder::new(spec.clone(), mode, args.epsilon, *metric)?;
        for p in &stream {
            ladder.observe(p)?;
        }
        let outcome = ladder.finish();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(r) => {
                let cost = clustering_cost(&d.points, &r.centers, metric)?;
                pending.push((name, Some(cost), true, ms));
            }
            Err(fair_kcenter::Error::Infeasible(_)) => pending.push((name, None, false, ms)),
            Err(e) => return Err(e.into()),
        }
    }

    let start = Instant::now();
    let centers = gonzalez(&d.points, spec.k(), metric)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let cost = clustering_cost(&d.points, &centers, metric)?;
    // the baseline ignores groups, so its centers may break the caps
    let fair = check_fairness(&centers, spec).is_feasible();
    pending.push(("gonzalez", Some(cost), fair, ms));

    for (algorithm, cost, feasible, runtime_ms) in pending {
        rows.push(BenchRow {
            schema: BENCH_SCHEMA,
            dataset: d.name.clone(),
            n: d.points.len(),
            k: spec.k(),
            algorithm,
            feasible,
            cost,
            reference_r: reference,
            ratio: match (cost, reference) {
                (Some(c), Some(r)) if r > 0.0 => Some(c / r),
                _ => None,
            },
            runtime_ms,
        });
    }
    Ok(())
}
