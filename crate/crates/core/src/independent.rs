//! Online λ-independent center set.
//!
//! Members are pairwise more than `λ` apart, and every point offered so far is
//! within `λ` of some member. A point joins only if it is strictly farther than
//! `λ` from every member, so at exactly `λ` the earlier point wins.
//!
//! With `λ ≥ 2r*` at most `k` points of one group can be mutually `λ`-separated
//! (two of them would share an optimal cluster otherwise), so exceeding a cap of
//! `k` certifies `λ < 2r*`. An overflowed set stays overflowed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::{Metric, Point};

/// Result of offering a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Offer {
    Added,
    /// Within `λ` of member `by` (index into [`IndependentSet::members`]).
    Covered { by: usize, distance: f64 },
    /// Adding the point would exceed the cap.
    Overflow,
}

#[derive(Debug, Clone)]
pub struct IndependentSet {
    lambda: f64,
    members: Vec<Point>,
    cap: Option<usize>,
    group: Option<usize>,
    overflowed: bool,
    evals: u64,
    split: f64,
}

impl IndependentSet {
    pub fn new(lambda: f64) -> Self {
        IndependentSet {
            lambda,
            members: Vec::new(),
            cap: None,
            group: None,
            overflowed: false,
            evals: 0,
            split: f64::INFINITY,
        }
    }

    /// Refuse to grow beyond `cap` members.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    /// Only accept points of one group.
    pub fn for_group(mut self, group: usize) -> Self {
        self.group = Some(group);
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn members(&self) -> &[Point] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn is_overflowed(&self) -> bool {
        self.overflowed
    }

    /// Distance evaluations performed so far.
    pub fn distance_evals(&self) -> u64 {
        self.evals
    }

    /// Smallest finite member distance that caused an addition.
    ///
    /// Replaying the same offers at any threshold in `[λ, split_distance)`
    /// yields exactly the same members.
    pub fn split_distance(&self) -> f64 {
        self.split
    }

    /// The same state under a different threshold. Only meaningful when the
    /// new threshold lies in `[λ, split_distance)`.
    pub(crate) fn relabelled(&self, lambda: f64) -> Self {
        IndependentSet {
            lambda,
            ..self.clone()
        }
    }

    pub(crate) fn clear(&mut self) {
        self.members = Vec::new();
    }

    /// Nearest member and its distance, scanning every member once.
    fn nearest<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, m) in self.members.iter().enumerate() {
            let d = metric.distance(&p.coords, &m.coords);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        self.evals += self.members.len() as u64;
        best
    }

    pub fn offer<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Result<Offer> {
        if let Some(g) = self.group {
            if p.group != g {
                return Err(Error::GroupMismatch {
                    expected: g,
                    found: p.group,
                });
            }
        }
        if self.overflowed {
            return Ok(Offer::Overflow);
        }
        let nearest = self.nearest(p, metric);
        match nearest {
            Some((by, distance)) if distance <= self.lambda => Ok(Offer::Covered { by, distance }),
            _ => {
                if self.cap.is_some_and(|c| self.members.len() >= c) {
                    self.overflowed = true;
                    return Ok(Offer::Overflow);
                }
                if let Some((_, d)) = nearest {
                    self.split = self.split.min(d);
                }
                self.members.push(p.clone());
                Ok(Offer::Added)
            }
        }
    }

    /// `d(p, Γ)`, or `+∞` for an empty set.
    pub fn min_dist<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> f64 {
        self.nearest(p, metric).map_or(f64::INFINITY, |(_, d)| d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Euclidean;
    use alloc::vec;
    use core::cell::Cell;
    use proptest::prelude::*;

    fn p(id: u64, x: f64) -> Point {
        Point::new(id, vec![x], 1)
    }

    #[test]
    fn offer_examples() {
        let mut s = IndependentSet::new(2.0);
        assert_eq!(s.offer(&p(0, 0.0), &Euclidean).unwrap(), Offer::Added);
        assert_eq!(
            s.offer(&p(1, 1.0), &Euclidean).unwrap(),
            Offer::Covered { by: 0, distance: 1.0 }
        );
        assert_eq!(s.offer(&p(2, 10.0), &Euclidean).unwrap(), Offer::Added);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn exactly_lambda_is_covered() {
        let mut s = IndependentSet::new(2.0);
        s.offer(&p(0, 0.0), &Euclidean).unwrap();
        assert!(matches!(s.offer(&p(1, 2.0), &Euclidean).unwrap(), Offer::Covered { .. }));
    }

    #[test]
    fn min_dist_examples() {
        let mut s = IndependentSet::new(2.0);
        assert_eq!(s.min_dist(&p(9, 4.0), &Euclidean), f64::INFINITY);
        s.offer(&p(0, 0.0), &Euclidean).unwrap();
        s.offer(&p(1, 10.0), &Euclidean).unwrap();
        assert_eq!(s.min_dist(&p(9, 4.0), &Euclidean), 4.0);
        assert_eq!(s.min_dist(&p(9, 7.0), &Euclidean), 3.0);
    }

    #[test]
    fn overflow_certificate() {
        let mut s = IndependentSet::new(2.0).with_cap(1);
        s.offer(&p(0, 0.0), &Euclidean).unwrap();
        assert_eq!(s.offer(&p(1, 10.0), &Euclidean).unwrap(), Offer::Overflow);
        assert!(s.is_overflowed());
        assert_eq!(s.len(), 1);
        // sticky, even for points that would be covered
        assert_eq!(s.offer(&p(2, 0.5), &Euclidean).unwrap(), Offer::Overflow);

        let mut s = IndependentSet::new(2.0).with_cap(2);
        s.offer(&p(0, 0.0), &Euclidean).unwrap();
        s.offer(&p(1, 10.0), &Euclidean).unwrap();
        assert!(!s.is_overflowed());

        let mut s = IndependentSet::new(2.0);
        for i in 0..50 {
            s.offer(&p(i, 10.0 * i as f64), &Euclidean).unwrap();
        }
        assert!(!s.is_overflowed());
    }

    #[test]
    fn group_filter() {
        let mut s = IndependentSet::new(1.0).for_group(2);
        assert_eq!(
            s.offer(&p(0, 0.0), &Euclidean),
            Err(Error::GroupMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn split_distance_tracks_tightest_addition() {
        let mut s = IndependentSet::new(1.0);
        s.offer(&p(0, 0.0), &Euclidean).unwrap();
        assert_eq!(s.split_distance(), f64::INFINITY);
        s.offer(&p(1, 5.0), &Euclidean).unwrap();
        s.offer(&p(2, 3.0), &Euclidean).unwrap();
        assert_eq!(s.split_distance(), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn separation_coverage_and_update_cost(
            xs in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..60),
            lambda in 0.5..20.0f64,
        ) {
            let calls = Cell::new(0u64);
            let counting = |a: &[f64], b: &[f64]| {
                calls.set(calls.get() + 1);
                Euclidean.distance(a, b)
            };
            let mut s = IndependentSet::new(lambda);
            let pts: Vec<_> = xs.iter().enumerate()
                .map(|(i, &(x, y))| Point::new(i as u64, vec![x, y], 1)).collect();
            for q in &pts {
                let before = calls.get();
                let size = s.len() as u64;
                let out = s.offer(q, &counting).unwrap();
                prop_assert_eq!(calls.get() - before, size);
                if let Offer::Covered { by, distance } = out {
                    prop_assert!(distance <= lambda);
                    prop_assert_eq!(Euclidean.distance(&q.coords, &s.members()[by].coords), distance);
                }
            }
            let m = s.members();
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    prop_assert!(Euclidean.distance(&m[i].coords, &m[j].coords) > lambda);
                }
            }
            for q in &pts {
                let d = m.iter().map(|c| Euclidean.distance(&q.coords, &c.coords)).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= lambda);
            }
        }
    }
}
