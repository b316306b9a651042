//! Data model shared by every solver: points, fairness caps, center sets,
//! distances, and solution quality.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A streamed data point.
///
/// `group` is 1-based: the groups of an instance with `m` groups are `1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: u64,
    pub coords: Vec<f64>,
    pub group: usize,
}

impl Point {
    pub fn new(id: u64, coords: Vec<f64>, group: usize) -> Self {
        Point { id, coords, group }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A distance on coordinate vectors.
///
/// Implementations must be symmetric, non-negative and zero on identical
/// inputs. The triangle inequality is assumed by every approximation bound in
/// this crate but never checked. Closures `Fn(&[f64], &[f64]) -> f64` are
/// metrics, which is how non-euclidean distances are supplied.
pub trait Metric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

/// Euclidean (L2) distance; the default metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Euclidean;

impl Metric for Euclidean {
    #[inline]
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        libm::sqrt(sum)
    }
}

impl<F> Metric for F
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    #[inline]
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self(a, b)
    }
}

/// Distance between two points, rejecting mismatched dimensions.
pub fn distance<M: Metric + ?Sized>(p: &Point, q: &Point, metric: &M) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(metric.distance(&p.coords, &q.coords))
}

/// Smallest distance from `p` to any of `points`; `+∞` when `points` is empty.
pub(crate) fn min_distance<'a, M, I>(p: &Point, points: I, metric: &M) -> f64
where
    M: Metric + ?Sized,
    I: IntoIterator<Item = &'a Point>,
{
    points
        .into_iter()
        .map(|q| metric.distance(&p.coords, &q.coords))
        .fold(f64::INFINITY, f64::min)
}

/// Per-group center budgets `k_1..k_m` with `k = Σ k_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessSpec {
    caps: Vec<usize>,
    k: usize,
}

impl FairnessSpec {
    pub fn new(caps: Vec<usize>) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::InvalidInput("at least one group is required".into()));
        }
        let k: usize = caps.iter().sum();
        if k == 0 {
            return Err(Error::InvalidInput(
                "every group cap is zero, no center can be chosen".into(),
            ));
        }
        Ok(FairnessSpec { caps, k })
    }

    /// Number of groups `m`.
    pub fn groups(&self) -> usize {
        self.caps.len()
    }

    /// Total budget `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    /// Cap of a 1-based group; zero for groups outside `1..=m`.
    pub fn cap(&self, group: usize) -> usize {
        group
            .checked_sub(1)
            .and_then(|g| self.caps.get(g))
            .copied()
            .unwrap_or(0)
    }

    pub(crate) fn require_groups(&self, m: usize) -> Result<()> {
        if self.groups() != m {
            return Err(Error::InvalidInput(alloc::format!(
                "this solver handles exactly {m} groups, caps describe {}",
                self.groups()
            )));
        }
        Ok(())
    }
}

/// A chosen set of centers together with the per-group tally `|C ∩ S_l|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: Vec<Point>,
    counts: Vec<usize>,
}

impl CenterSet {
    /// Builds a center set over `m` groups. Ids must be distinct.
    pub fn new(centers: Vec<Point>, m: usize) -> Result<Self> {
        for (i, c) in centers.iter().enumerate() {
            if c.group == 0 || c.group > m {
                return Err(Error::UnknownGroup {
                    group: c.group,
                    groups: m,
                });
            }
            if centers[..i].iter().any(|o| o.id == c.id) {
                return Err(Error::InvalidInput(alloc::format!(
                    "duplicate center id {}",
                    c.id
                )));
            }
        }
        Ok(Self::from_trusted(centers, m))
    }

    pub(crate) fn from_trusted(centers: Vec<Point>, m: usize) -> Self {
        let mut counts = vec![0; m];
        for c in &centers {
            debug_assert!(c.group >= 1 && c.group <= m);
            counts[c.group - 1] += 1;
        }
        CenterSet { centers, counts }
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn into_points(self) -> Vec<Point> {
        self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `|C ∩ S_l|` indexed by `l - 1`.
    pub fn per_group_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn ids(&self) -> Vec<u64> {
        self.centers.iter().map(|c| c.id).collect()
    }

    /// Returns a copy without the center with the given id.
    pub fn without(&self, id: u64) -> CenterSet {
        let rest = self.centers.iter().filter(|c| c.id != id).cloned().collect();
        CenterSet::from_trusted(rest, self.counts.len())
    }
}

/// A finite point set with a declared dimension and group count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    groups: usize,
    points: Vec<Point>,
}

impl Dataset {
    pub fn new(dim: usize, groups: usize, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.group == 0 || p.group > groups {
                return Err(Error::UnknownGroup {
                    group: p.group,
                    groups,
                });
            }
        }
        Ok(Dataset {
            dim,
            groups,
            points,
        })
    }

    /// Infers the dimension from the first point.
    pub fn from_points(groups: usize, points: Vec<Point>) -> Result<Self> {
        let dim = points.first().map_or(0, Point::dim);
        Self::new(dim, groups, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// The same points reordered so that every group-1 point precedes every
    /// group-2 point, and so on; order within a group is kept.
    pub fn group_sorted(&self) -> Vec<Point> {
        let mut pts = self.points.clone();
        pts.sort_by_key(|p| p.group);
        pts
    }
}

/// Running `max_s min_c d(s, c)` over a stream of points.
///
/// Lets a caller measure the cost of a solution in a second pass without
/// materializing the data.
#[derive(Debug)]
pub struct CostAccumulator<'a, M: ?Sized> {
    centers: &'a CenterSet,
    metric: &'a M,
    worst: f64,
    seen: usize,
}

impl<'a, M: Metric + ?Sized> CostAccumulator<'a, M> {
    pub fn new(centers: &'a CenterSet, metric: &'a M) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("center set"));
        }
        Ok(CostAccumulator {
            centers,
            metric,
            worst: 0.0,
            seen: 0,
        })
    }

    pub fn observe(&mut self, p: &Point) -> Result<()> {
        let mut best = f64::INFINITY;
        for c in self.centers.centers() {
            best = best.min(distance(p, c, self.metric)?);
        }
        self.worst = self.worst.max(best);
        self.seen += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<f64> {
        if self.seen == 0 {
            return Err(Error::Empty("point set"));
        }
        Ok(self.worst)
    }
}

/// `max_{s ∈ S} d(s, C)`.
pub fn clustering_cost<'a, M, I>(points: I, centers: &CenterSet, metric: &M) -> Result<f64>
where
    M: Metric + ?Sized,
    I: IntoIterator<Item = &'a Point>,
{
    let mut acc = CostAccumulator::new(centers, metric)?;
    for p in points {
        acc.observe(p)?;
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `|C ∩ S_group| > cap`.
    Group {
        group: usize,
        count: usize,
        cap: usize,
    },
    /// `|C| > k`.
    Budget { count: usize, k: usize },
}

/// Every fairness violation of a center set; empty means feasible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FairnessReport {
    pub violations: Vec<Violation>,
}

impl FairnessReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_fairness(centers: &CenterSet, spec: &FairnessSpec) -> FairnessReport {
    let mut violations = Vec::new();
    let counts = centers.per_group_counts();
    let groups = counts.len().max(spec.groups());
    for g in 1..=groups {
        let count = counts.get(g - 1).copied().unwrap_or(0);
        let cap = spec.cap(g);
        if count > cap {
            violations.push(Violation::Group {
                group: g,
                count,
                cap,
            });
        }
    }
    if centers.len() > spec.k() {
        violations.push(Violation::Budget {
            count: centers.len(),
            k: spec.k(),
        });
    }
    FairnessReport { violations }
}
