//! Ratio-3 solver for semi-structured streams with two groups: every group-1
//! point arrives before any group-2 point.
//!
//! Group 1 builds `Γ'_1` at `λ = 2r̂`. For each group-2 point the rule depends on
//! whether `|Γ'_1| ≤ k_1`:
//!
//! - yes: the point joins `Γ'_2` when it is farther than `3λ/2` from `Γ'_1` and
//!   farther than `λ` from `Γ'_2`;
//! - no: it joins `Γ'_2` when farther than `λ` from `Γ'_1 ∪ Γ'_2`, and
//!   independently becomes the replacement `σ(j)` of the first member `j` of
//!   `Γ'_1` that has none yet and lies within `λ/2`.
//!
//! Afterwards `|Γ'_1| - k_1` replaced members are swapped for their replacements.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::independent::{IndependentSet, Offer};
use crate::metric::{CenterSet, FairnessSpec, Metric, Point};
use crate::stream::{Infeasibility, SolveOutcome, UpdateStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Group1,
    Group2,
}

#[derive(Debug, Clone)]
pub struct SemiInstance {
    r_hat: f64,
    spec: FairnessSpec,
    gamma1: IndependentSet,
    gamma2: Option<IndependentSet>,
    /// `(index into Γ'_1, σ)` in assignment order.
    subs: Vec<(usize, Point)>,
    replaced: Vec<bool>,
    phase: Phase,
    overflowed: bool,
    gate_split: f64,
    stats: UpdateStats,
    peak_stored: usize,
}

impl SemiInstance {
    pub fn new(r_hat: f64, spec: FairnessSpec) -> Result<Self> {
        spec.require_groups(2)?;
        if !(r_hat >= 0.0 && r_hat.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "radius guess must be finite and non-negative, got {r_hat}"
            )));
        }
        let gamma1 = IndependentSet::new(2.0 * r_hat)
            .with_cap(spec.k())
            .for_group(1);
        Ok(SemiInstance {
            r_hat,
            spec,
            gamma1,
            gamma2: None,
            subs: Vec::new(),
            replaced: Vec::new(),
            phase: Phase::Group1,
            overflowed: false,
            gate_split: f64::INFINITY,
            stats: UpdateStats::default(),
            peak_stored: 0,
        })
    }

    pub fn r_hat(&self) -> f64 {
        self.r_hat
    }

    pub fn lambda(&self) -> f64 {
        2.0 * self.r_hat
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn gamma1(&self) -> &[Point] {
        self.gamma1.members()
    }

    pub fn gamma2(&self) -> &[Point] {
        self.gamma2.as_ref().map_or(&[], |g| g.members())
    }

    /// `(c, σ(c))` pairs in the order replacements were found.
    pub fn replacements(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.subs
            .iter()
            .map(move |(j, s)| (&self.gamma1.members()[*j], s))
    }

    pub fn is_overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn stored_points(&self) -> usize {
        self.gamma1.len() + self.gamma2().len() + self.subs.len()
    }

    pub fn peak_stored(&self) -> usize {
        self.peak_stored
    }

    pub fn update_stats(&self) -> UpdateStats {
        self.stats
    }

    pub fn process<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Result<()> {
        match p.group {
            1 if self.phase == Phase::Group2 => return Err(Error::StreamOrder { id: p.id }),
            1 | 2 => {}
            g => return Err(Error::UnknownGroup { group: g, groups: 2 }),
        }
        if self.overflowed {
            return Ok(());
        }
        let outcome = if p.group == 1 {
            let bound = self.gamma1.len() as u64;
            let before = self.gamma1.distance_evals();
            let out = self.gamma1.offer(p, metric)?;
            self.stats.record(self.gamma1.distance_evals() - before, bound);
            out
        } else {
            self.process_group2(p, metric)?
        };
        if outcome == Offer::Overflow {
            self.overflowed = true;
            self.gamma1.clear();
            self.gamma2 = None;
            self.subs.clear();
        }
        self.peak_stored = self.peak_stored.max(self.stored_points());
        Ok(())
    }

    fn process_group2<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Result<Offer> {
        if self.phase == Phase::Group1 {
            self.phase = Phase::Group2;
            self.replaced = vec![false; self.gamma1.len()];
        }
        let k = self.spec.k();
        let first_len = self.gamma1.len();
        let gamma2 = self.gamma2.get_or_insert_with(|| {
            IndependentSet::new(2.0 * self.r_hat)
                .with_cap(k.saturating_sub(first_len))
                .for_group(2)
        });
        let wide = first_len > self.spec.cap(1);
        let bound = (first_len + gamma2.len() + if wide { first_len } else { 0 }) as u64;

        let to_first: Vec<f64> = self
            .gamma1
            .members()
            .iter()
            .map(|c| metric.distance(&p.coords, &c.coords))
            .collect();
        let mut evals = to_first.len() as u64;
        let d_first = to_first.iter().copied().fold(f64::INFINITY, f64::min);

        // gate on Γ'_1: 3λ/2 = 3r̂ when |Γ'_1| ≤ k_1, λ = 2r̂ otherwise
        let gate = if wide { 2.0 } else { 3.0 };
        let mut outcome = Offer::Covered {
            by: 0,
            distance: d_first,
        };
        if d_first > gate * self.r_hat {
            if d_first.is_finite() {
                self.gate_split = self.gate_split.min(d_first / gate);
            }
            let before = gamma2.distance_evals();
            outcome = gamma2.offer(p, metric)?;
            evals += gamma2.distance_evals() - before;
        }

        if wide && outcome != Offer::Overflow {
            for (j, &d) in to_first.iter().enumerate() {
                if self.replaced[j] {
                    continue;
                }
                if d <= self.r_hat {
                    self.replaced[j] = true;
                    self.subs.push((j, p.clone()));
                    break;
                }
                self.gate_split = self.gate_split.min(d);
            }
        }
        self.stats.record(evals, bound);
        Ok(outcome)
    }

    /// Any `r' ∈ [r̂, valid_below)` replays the stream to this exact state.
    pub(crate) fn valid_below(&self) -> f64 {
        let g2 = self
            .gamma2
            .as_ref()
            .map_or(f64::INFINITY, |g| g.split_distance() / 2.0);
        (self.gamma1.split_distance() / 2.0)
            .min(g2)
            .min(self.gate_split)
    }

    pub(crate) fn relabelled(&self, r_hat: f64) -> Self {
        SemiInstance {
            r_hat,
            gamma1: self.gamma1.relabelled(2.0 * r_hat),
            gamma2: self.gamma2.as_ref().map(|g| g.relabelled(2.0 * r_hat)),
            ..self.clone()
        }
    }

    pub(crate) fn stored(&self) -> impl Iterator<Item = &Point> {
        self.gamma1()
            .iter()
            .chain(self.gamma2())
            .chain(self.subs.iter().map(|(_, s)| s))
    }

    pub fn finalize(&self) -> SolveOutcome {
        if self.overflowed {
            return SolveOutcome::Infeasible(Infeasibility::StreamOverflow);
        }
        let first = self.gamma1.members();
        let k1 = self.spec.cap(1);
        let mut centers: Vec<Point> = self.gamma2().to_vec();
        if first.len() <= k1 {
            centers.extend_from_slice(first);
        } else {
            let t = first.len() - k1;
            if self.subs.len() < t {
                return SolveOutcome::Infeasible(Infeasibility::FairnessViolated);
            }
            let swapped = &self.subs[..t];
            for (j, c) in first.iter().enumerate() {
                if !swapped.iter().any(|(s, _)| *s == j) {
                    centers.push(c.clone());
                }
            }
            // a replacement lies within r̂ of Γ'_1, so it never passed the Γ'_2 gate
            centers.extend(swapped.iter().map(|(_, s)| s.clone()));
        }
        SolveOutcome::checked(CenterSet::from_trusted(centers, 2), &self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{clustering_cost, Euclidean};

    fn pts(xs: &[(f64, usize)]) -> Vec<Point> {
        xs.iter()
            .enumerate()
            .map(|(i, &(x, g))| Point::new(i as u64, vec![x], g))
            .collect()
    }

    fn xs(points: &[Point]) -> Vec<f64> {
        let mut v: Vec<f64> = points.iter().map(|p| p.coords[0]).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn feed(inst: &mut SemiInstance, points: &[Point]) {
        for p in points {
            inst.process(p, &Euclidean).unwrap();
        }
    }

    #[test]
    fn replacement_and_wide_branch() {
        // λ = 0.8, Γ'_1 = {0, 100} exceeds k_1 = 1
        let mut inst = SemiInstance::new(0.4, FairnessSpec::new(vec![1, 2]).unwrap()).unwrap();
        let points = pts(&[(0.0, 1), (100.0, 1), (0.4, 2), (50.0, 2)]);
        feed(&mut inst, &points[..3]);
        assert!(inst.gamma2().is_empty());
        let subs: Vec<_> = inst.replacements().map(|(c, s)| (c.coords[0], s.coords[0])).collect();
        assert_eq!(subs, vec![(0.0, 0.4)]);

        feed(&mut inst, &points[3..]);
        assert_eq!(xs(inst.gamma2()), vec![50.0]);
        assert_eq!(inst.replacements().count(), 1);

        let out = inst.finalize();
        let c = out.centers().unwrap();
        assert_eq!(xs(c.centers()), vec![0.4, 50.0, 100.0]);
        let cost = clustering_cost(&points, c, &Euclidean).unwrap();
        assert!((cost - 0.4).abs() < 1e-12);
        assert!(cost <= 3.0 * 0.4);
    }

    #[test]
    fn narrow_branch_gate() {
        let mut inst = SemiInstance::new(0.5, FairnessSpec::new(vec![1, 1]).unwrap()).unwrap();
        let points = pts(&[(0.0, 1), (0.5, 2), (10.0, 2)]);
        feed(&mut inst, &points[..2]);
        assert!(inst.gamma2().is_empty());
        feed(&mut inst, &points[2..]);
        assert_eq!(xs(inst.gamma2()), vec![10.0]);
        let c = inst.finalize().into_centers().unwrap();
        assert_eq!(xs(c.centers()), vec![0.0, 10.0]);
        assert_eq!(clustering_cost(&points, &c, &Euclidean).unwrap(), 0.5);
    }

    #[test]
    fn missing_replacements_violate_fairness() {
        let mut inst = SemiInstance::new(0.5, FairnessSpec::new(vec![1, 2]).unwrap()).unwrap();
        feed(&mut inst, &pts(&[(0.0, 1), (10.0, 1), (30.0, 2)]));
        assert_eq!(
            inst.finalize(),
            SolveOutcome::Infeasible(Infeasibility::FairnessViolated)
        );
    }

    #[test]
    fn group1_after_group2_is_rejected() {
        let mut inst = SemiInstance::new(1.0, FairnessSpec::new(vec![1, 1]).unwrap()).unwrap();
        let points = pts(&[(0.0, 1), (5.0, 2), (9.0, 1)]);
        inst.process(&points[0], &Euclidean).unwrap();
        inst.process(&points[1], &Euclidean).unwrap();
        assert_eq!(
            inst.process(&points[2], &Euclidean),
            Err(Error::StreamOrder { id: 2 })
        );
    }

    #[test]
    fn only_group2() {
        let mut inst = SemiInstance::new(1.0, FairnessSpec::new(vec![1, 1]).unwrap()).unwrap();
        feed(&mut inst, &pts(&[(0.0, 2), (1.0, 2)]));
        let c = inst.finalize().into_centers().unwrap();
        assert_eq!(xs(c.centers()), vec![0.0]);
    }

    #[test]
    fn second_group_overflow() {
        // |Γ'_1| = 1, so Γ'_2 may hold at most k - 1 = 1 point
        let mut inst = SemiInstance::new(0.5, FairnessSpec::new(vec![1, 1]).unwrap()).unwrap();
        feed(&mut inst, &pts(&[(0.0, 1), (10.0, 2), (20.0, 2)]));
        assert!(inst.is_overflowed());
        assert_eq!(inst.stored_points(), 0);
        assert_eq!(
            inst.finalize(),
            SolveOutcome::Infeasible(Infeasibility::StreamOverflow)
        );
    }

    #[test]
    fn zero_group1_cap_swaps_every_member() {
        let mut inst = SemiInstance::new(1.0, FairnessSpec::new(vec![0, 2]).unwrap()).unwrap();
        feed(&mut inst, &pts(&[(0.0, 1), (1.0, 2)]));
        let c = inst.finalize().into_centers().unwrap();
        assert_eq!(c.ids(), vec![1]);
    }
}
