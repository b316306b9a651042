//! Streaming fair k-center clustering.
//!
//! Points arrive one at a time, each labelled with a demographic group. The
//! goal is a center set `C` drawn from the stream that minimizes the largest
//! point-to-center distance while taking at most `k_l` centers from group `l`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! core:
//!
//! - [`metric`]: points, fairness caps, center sets, distances and costs.
//! - [`independent`]: the online λ-independent center set.
//! - [`stream`]: the one-pass two-group solver with ratio 5 for a known radius.
//! - [`semi`]: the ratio-3 solver for streams that deliver group 1 before group 2.
//! - [`ladder`]: a geometric grid of radius guesses that removes the known-radius
//!   assumption.
//! - [`oracle`] and [`planted`]: exhaustive optimum, farthest-first baseline and a
//!   generator of instances whose optimum is known.
//!
//! CSV ingestion, JSON reports and the command line live in the companion
//! `fair-kcenter-cli` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod independent;
pub mod ladder;
pub mod metric;
pub mod oracle;
pub mod planted;
pub mod semi;
pub mod stream;

pub use error::{Error, Result};
pub use independent::{IndependentSet, Offer};
pub use ladder::{run_known, Ladder, LadderResult, LadderStats, Mode};
pub use metric::{
    check_fairness, clustering_cost, distance, CenterSet, Dataset, Euclidean, FairnessReport,
    FairnessSpec, Metric, Point, Violation,
};
pub use oracle::{brute_force_opt, brute_force_opt_with, candidate_radii, gonzalez, OracleLimits, OracleResult};
pub use planted::{generate_planted, PlantedConfig, PlantedDataset};
pub use semi::SemiInstance;
pub use stream::{AuxGraph, Case, Case3Trace, Infeasibility, SolveOutcome, StreamInstance};
