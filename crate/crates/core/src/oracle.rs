//! Ground truth for small instances: exhaustive optimum, candidate radii, and
//! the farthest-first baseline.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::{CenterSet, FairnessSpec, Metric, Point};

/// Size guard for [`brute_force_opt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_k: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_n: 16, max_k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub r_opt: f64,
    pub optimal_centers: CenterSet,
    /// Subsets whose cost was evaluated.
    pub evaluated: u64,
}

fn check_dims(points: &[Point]) -> Result<()> {
    let dim = points.first().map_or(0, Point::dim);
    match points.iter().find(|p| p.dim() != dim) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        }),
        None => Ok(()),
    }
}

/// Exact optimum with the default size guard.
pub fn brute_force_opt<M: Metric + ?Sized>(
    points: &[Point],
    spec: &FairnessSpec,
    metric: &M,
) -> Result<OracleResult> {
    brute_force_opt_with(points, spec, metric, OracleLimits::default())
}

/// Exact optimum over every center set within the caps.
///
/// Subsets are visited by increasing size, and within one size by increasing
/// bitmask over input positions. The first subset reaching the optimum is the
/// returned witness.
pub fn brute_force_opt_with<M: Metric + ?Sized>(
    points: &[Point],
    spec: &FairnessSpec,
    metric: &M,
    limits: OracleLimits,
) -> Result<OracleResult> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("dataset"));
    }
    let k = spec.k().min(n);
    if n > limits.max_n || k > limits.max_k || n >= 64 {
        return Err(Error::TooLarge {
            n,
            k,
            max_n: limits.max_n,
            max_k: limits.max_k,
        });
    }
    check_dims(points)?;
    let m = spec.groups();
    if let Some(p) = points.iter().find(|p| p.group == 0 || p.group > m) {
        return Err(Error::UnknownGroup {
            group: p.group,
            groups: m,
        });
    }
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|p| points.iter().map(|q| metric.distance(&p.coords, &q.coords)).collect())
        .collect();

    let mut best: Option<(f64, u64)> = None;
    let mut evaluated = 0u64;
    let mut counts = vec![0usize; m];
    for size in 1..=k {
        // Gosper's hack walks the size-`size` masks in increasing order
        let mut mask: u64 = (1u64 << size) - 1;
        while mask < (1u64 << n) {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut within_caps = true;
            for (j, p) in points.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    counts[p.group - 1] += 1;
                    within_caps &= counts[p.group - 1] <= spec.cap(p.group);
                }
            }
            if within_caps {
                evaluated += 1;
                let bound = best.map_or(f64::INFINITY, |b| b.0);
                let cost = subset_cost(&dist, mask, bound);
                if cost < bound {
                    best = Some((cost, mask));
                }
            }
            let low = mask & mask.wrapping_neg();
            let ripple = mask + low;
            mask = (((ripple ^ mask) >> 2) / low) | ripple;
        }
    }
    let (r_opt, mask) = best.ok_or_else(|| {
        Error::Infeasible("no nonempty center set fits within the caps".into())
    })?;
    let centers = points
        .iter()
        .enumerate()
        .filter(|(j, _)| mask >> j & 1 == 1)
        .map(|(_, p)| p.clone())
        .collect();
    Ok(OracleResult {
        r_opt,
        optimal_centers: CenterSet::new(centers, m)?,
        evaluated,
    })
}

/// Largest nearest-center distance, or anything `≥ bound` once it cannot win.
fn subset_cost(dist: &[Vec<f64>], mask: u64, bound: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for row in dist {
        let near = row
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(near);
        if worst >= bound {
            break;
        }
    }
    worst
}

/// Sorted distinct values among the pairwise distances and their halves;
/// `[0.0]` when there is no pair.
pub fn candidate_radii<M: Metric + ?Sized>(points: &[Point], metric: &M) -> Vec<f64> {
    let mut radii = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d = metric.distance(&p.coords, &q.coords);
            radii.push(d);
            radii.push(d / 2.0);
        }
    }
    if radii.is_empty() {
        radii.push(0.0);
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// Farthest-first traversal from the first point, ignoring groups.
///
/// Ties go to the earliest point. Stops after `k` centers or once every point
/// coincides with a center.
pub fn gonzalez<M: Metric + ?Sized>(points: &[Point], k: usize, metric: &M) -> Result<CenterSet> {
    let first = points.first().ok_or(Error::Empty("dataset"))?;
    if k == 0 {
        return Err(Error::InvalidInput("gonzalez needs k >= 1".into()));
    }
    check_dims(points)?;
    let m = points.iter().map(|p| p.group).max().unwrap_or(1);
    let mut centers = vec![first.clone()];
    let mut near: Vec<f64> = points
        .iter()
        .map(|p| metric.distance(&p.coords, &first.coords))
        .collect();
    while centers.len() < k {
        let (far, &d) = near
            .iter()
            .enumerate()
            .fold((0, &near[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
        if d == 0.0 {
            break;
        }
        let c = &points[far];
        for (slot, p) in near.iter_mut().zip(points) {
            *slot = slot.min(metric.distance(&p.coords, &c.coords));
        }
        centers.push(c.clone());
    }
    CenterSet::new(centers, m)
}
