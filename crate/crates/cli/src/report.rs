//! JSON documents written by the command line.

use fair_kcenter::{CenterSet, LadderStats};
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "fair-kcenter.report/v1";
pub const PLANTED_SCHEMA: &str = "fair-kcenter.planted/v1";
pub const BENCH_SCHEMA: &str = "fair-kcenter.bench/v1";
pub const ERROR_SCHEMA: &str = "fair-kcenter.error/v1";

#[derive(Debug, Serialize)]
pub struct CenterOut {
    pub id: u64,
    pub coords: Vec<f64>,
    pub group: usize,
    pub label: String,
}

pub fn centers_out(centers: &CenterSet, labels: &[String]) -> Vec<CenterOut> {
    centers
        .centers()
        .iter()
        .map(|c| CenterOut {
            id: c.id,
            coords: c.coords.clone(),
            group: c.group,
            label: labels.get(c.group - 1).cloned().unwrap_or_default(),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Instances {
    pub total: usize,
    pub live: usize,
    pub pruned: usize,
    pub low: f64,
    pub high: f64,
}

impl From<&LadderStats> for Instances {
    fn from(s: &LadderStats) -> Self {
        Instances {
            total: s.instances,
            live: s.live,
            pruned: s.pruned,
            low: s.low,
            high: s.high,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub mode: &'static str,
    pub metric: &'static str,
    pub r_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub k: usize,
    pub caps: Vec<usize>,
    pub group_labels: Vec<String>,
    pub n_points: u64,
    pub centers: Vec<CenterOut>,
    pub per_group_counts: Vec<usize>,
    /// Present only when the input could be read a second time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    /// Largest number of points held by a single radius guess.
    pub points_stored_peak: usize,
    /// Largest number of points held at once over all guesses and buffers.
    pub points_stored_peak_total: usize,
    pub distance_evals: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<Instances>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsets_evaluated: Option<u64>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct PlantedReport {
    pub schema: &'static str,
    pub out: String,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub caps: Vec<usize>,
    pub dim: usize,
    pub separation: f64,
    pub planted_r: f64,
    pub planted_center_ids: Vec<u64>,
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub schema: &'static str,
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub algorithm: &'static str,
    pub feasible: bool,
    pub cost: Option<f64>,
    /// Planted radius or exact optimum, when known.
    pub reference_r: Option<f64>,
    pub ratio: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport<'a> {
    pub schema: &'static str,
    pub kind: &'a str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
}
