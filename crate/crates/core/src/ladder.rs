//! Radius guessing: run one solver per guess on a geometric grid and keep the
//! smallest guess that ends feasible.
//!
//! The first points are buffered until `k + 1` distinct positions have been
//! seen. Two of those share an optimal cluster, so their distance `δ` satisfies
//! `δ ≤ 2r*`, and the grid starts at `low = δ/2 ≤ r*`. Guesses are
//! `low·(1+ε)^j`; the grid guess just above `r*` is at most `(1+ε)·r*`.
//!
//! Guesses that overflow are pruned for good (the overflow certifies `r̂ < r*`).
//! The grid grows upwards lazily: the topmost solver is kept in a state where
//! every comparison it ever made would have come out the same for any larger
//! guess, so a copy of it relabelled with a larger guess is exactly the solver
//! that would have run on that guess from the start. Before a point that would
//! break this property reaches the top, new guesses are cloned above it.
//!
//! If the stream ends before the grid exists, the buffer is the whole input and
//! the guesses are the candidate radii `{0} ∪ {d(p, q)}` instead.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::{CenterSet, FairnessSpec, Metric, Point};
use crate::semi::SemiInstance;
use crate::stream::{SolveOutcome, StreamInstance, UpdateStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Arbitrary arrival order; ratio 5.
    General,
    /// All of group 1 before group 2; ratio 3.
    Semi,
}

/// A single-guess solver in either mode.
#[derive(Debug, Clone)]
pub enum Solver {
    General(StreamInstance),
    Semi(SemiInstance),
}

impl Solver {
    pub fn new(mode: Mode, r_hat: f64, spec: FairnessSpec) -> Result<Self> {
        Ok(match mode {
            Mode::General => Solver::General(StreamInstance::new(r_hat, spec)?),
            Mode::Semi => Solver::Semi(SemiInstance::new(r_hat, spec)?),
        })
    }

    pub fn r_hat(&self) -> f64 {
        match self {
            Solver::General(s) => s.r_hat(),
            Solver::Semi(s) => s.r_hat(),
        }
    }

    pub fn process<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Result<()> {
        match self {
            Solver::General(s) => s.process(p, metric),
            Solver::Semi(s) => s.process(p, metric),
        }
    }

    pub fn is_overflowed(&self) -> bool {
        match self {
            Solver::General(s) => s.is_overflowed(),
            Solver::Semi(s) => s.is_overflowed(),
        }
    }

    pub fn stored_points(&self) -> usize {
        match self {
            Solver::General(s) => s.stored_points(),
            Solver::Semi(s) => s.stored_points(),
        }
    }

    pub fn peak_stored(&self) -> usize {
        match self {
            Solver::General(s) => s.peak_stored(),
            Solver::Semi(s) => s.peak_stored(),
        }
    }

    pub fn update_stats(&self) -> UpdateStats {
        match self {
            Solver::General(s) => s.update_stats(),
            Solver::Semi(s) => s.update_stats(),
        }
    }

    pub fn finalize<M: Metric + ?Sized>(&self, metric: &M) -> SolveOutcome {
        match self {
            Solver::General(s) => s.finalize(metric),
            Solver::Semi(s) => s.finalize(),
        }
    }

    /// Guesses up to this bound would have reached the same state.
    fn valid_below(&self) -> f64 {
        if self.is_overflowed() {
            return self.r_hat();
        }
        match self {
            Solver::General(s) => s.valid_below(),
            Solver::Semi(s) => s.valid_below(),
        }
    }

    fn relabelled(&self, r_hat: f64) -> Self {
        match self {
            Solver::General(s) => Solver::General(s.relabelled(r_hat)),
            Solver::Semi(s) => Solver::Semi(s.relabelled(r_hat)),
        }
    }

    /// Largest pairwise distance among stored points.
    fn stored_spread<M: Metric + ?Sized>(&self, metric: &M) -> f64 {
        let pts: Vec<&Point> = match self {
            Solver::General(s) => s.stored().collect(),
            Solver::Semi(s) => s.stored().collect(),
        };
        let mut spread: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                spread = spread.max(metric.distance(&p.coords, &q.coords));
            }
        }
        spread
    }
}

/// Single-guess run at a known radius.
pub fn run_known<'a, M, I>(
    r_star: f64,
    points: I,
    spec: &FairnessSpec,
    mode: Mode,
    metric: &M,
) -> Result<SolveOutcome>
where
    M: Metric + ?Sized,
    I: IntoIterator<Item = &'a Point>,
{
    let mut solver = Solver::new(mode, r_star, spec.clone())?;
    let mut dim = None;
    for p in points {
        check_dim(&mut dim, p)?;
        solver.process(p, metric)?;
    }
    if dim.is_none() {
        return Err(Error::Empty("point stream"));
    }
    Ok(solver.finalize(metric))
}

fn check_dim(dim: &mut Option<usize>, p: &Point) -> Result<()> {
    match *dim {
        None => *dim = Some(p.dim()),
        Some(d) if d != p.dim() => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            })
        }
        Some(_) => {}
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Rung {
    guess: f64,
    /// `None` once pruned.
    solver: Option<Solver>,
    peak_stored: usize,
    stats: UpdateStats,
}

/// Counters describing one ladder run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LadderStats {
    pub points: u64,
    /// Grid guesses ever instantiated.
    pub instances: usize,
    pub live: usize,
    pub pruned: usize,
    pub low: f64,
    pub high: f64,
    /// Largest number of points any single guess stored at once.
    pub peak_stored_per_instance: usize,
    /// Largest number of points stored across all guesses plus the buffer.
    pub peak_stored_total: usize,
    pub peak_buffer: usize,
    pub distance_evals: u64,
    /// Points, summed over guesses, that needed more distance evaluations than
    /// the solver had stored representatives.
    pub update_over_budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderResult {
    pub best_guess: f64,
    pub centers: CenterSet,
    /// Filled in by a caller that can replay the input.
    pub cost: Option<f64>,
    /// Guesses pruned or finalized infeasible below `best_guess`.
    pub discarded: usize,
    pub stats: LadderStats,
}

/// Streaming driver over a grid of radius guesses.
#[derive(Debug)]
pub struct Ladder<M> {
    spec: FairnessSpec,
    mode: Mode,
    epsilon: f64,
    metric: M,
    dim: Option<usize>,
    seen_group2: bool,
    buffer: Vec<Point>,
    distinct: usize,
    low: f64,
    rungs: Vec<Rung>,
    stats: LadderStats,
}

impl<M: Metric> Ladder<M> {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(spec: FairnessSpec, mode: Mode, epsilon: f64, metric: M) -> Result<Self> {
        spec.require_groups(2)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Ladder {
            spec,
            mode,
            epsilon,
            metric,
            dim: None,
            seen_group2: false,
            buffer: Vec::new(),
            distinct: 0,
            low: 0.0,
            rungs: Vec::new(),
            stats: LadderStats::default(),
        })
    }

    pub fn metric(&self) -> &M {
        &self.metric
    }

    pub fn is_bootstrapping(&self) -> bool {
        self.rungs.is_empty()
    }

    /// Distinct positions needed before the grid is built.
    pub fn bootstrap_size(&self) -> usize {
        self.spec.k() + 1
    }

    pub fn buffered(&self) -> &[Point] {
        &self.buffer
    }

    /// Current grid guesses with whether each is still live.
    pub fn guesses(&self) -> Vec<(f64, bool)> {
        self.rungs
            .iter()
            .map(|r| (r.guess, r.solver.is_some()))
            .collect()
    }

    pub fn stats(&self) -> LadderStats {
        let mut s = self.stats;
        s.instances = self.rungs.len();
        s.live = self.rungs.iter().filter(|r| r.solver.is_some()).count();
        s.pruned = s.instances - s.live;
        s.low = self.low;
        s.high = self.rungs.last().map_or(0.0, |r| r.guess);
        s.peak_stored_per_instance = self.rungs.iter().map(|r| r.peak_stored).max().unwrap_or(0);
        s.distance_evals = self.rungs.iter().map(|r| r.stats.distance_evals).sum();
        s.update_over_budget = self.rungs.iter().map(|r| r.stats.over_budget).sum();
        s
    }

    fn guess(&self, j: usize) -> f64 {
        self.low * libm::pow(1.0 + self.epsilon, j as f64)
    }

    pub fn observe(&mut self, p: &Point) -> Result<()> {
        if p.group != 1 && p.group != 2 {
            return Err(Error::UnknownGroup {
                group: p.group,
                groups: 2,
            });
        }
        check_dim(&mut self.dim, p)?;
        if self.mode == Mode::Semi {
            if p.group == 1 && self.seen_group2 {
                return Err(Error::StreamOrder { id: p.id });
            }
            self.seen_group2 |= p.group == 2;
        }
        self.stats.points += 1;
        if self.is_bootstrapping() {
            self.buffer_point(p)?;
        } else {
            self.feed(p)?;
        }
        self.track_storage();
        Ok(())
    }

    fn buffer_point(&mut self, p: &Point) -> Result<()> {
        let mut new_position = true;
        for q in &self.buffer {
            if self.metric.distance(&p.coords, &q.coords) == 0.0 {
                if q.group == p.group {
                    // an exact duplicate changes no solver state
                    return Ok(());
                }
                new_position = false;
            }
        }
        self.buffer.push(p.clone());
        self.stats.peak_buffer = self.stats.peak_buffer.max(self.buffer.len());
        if new_position {
            self.distinct += 1;
        }
        if self.distinct >= self.bootstrap_size() {
            self.build_grid()?;
        }
        Ok(())
    }

    fn build_grid(&mut self) -> Result<()> {
        let mut delta = f64::INFINITY;
        for (i, p) in self.buffer.iter().enumerate() {
            for q in &self.buffer[i + 1..] {
                let d = self.metric.distance(&p.coords, &q.coords);
                if d > 0.0 {
                    delta = delta.min(d);
                }
            }
        }
        debug_assert!(delta.is_finite());
        self.low = delta / 2.0;
        let buffer = core::mem::take(&mut self.buffer);
        loop {
            let guess = self.guess(self.rungs.len());
            if !guess.is_finite() {
                return Err(Error::InvalidInput("radius grid diverged".into()));
            }
            let mut solver = Solver::new(self.mode, guess, self.spec.clone())?;
            for p in &buffer {
                solver.process(p, &self.metric)?;
            }
            let top = solver.valid_below() == f64::INFINITY;
            self.push_rung(guess, solver);
            if top {
                return Ok(());
            }
        }
    }

    fn push_rung(&mut self, guess: f64, solver: Solver) {
        let mut rung = Rung {
            guess,
            peak_stored: solver.peak_stored(),
            stats: solver.update_stats(),
            solver: Some(solver),
        };
        if rung.solver.as_ref().is_some_and(Solver::is_overflowed) {
            rung.solver = None;
        }
        self.rungs.push(rung);
    }

    fn feed(&mut self, p: &Point) -> Result<()> {
        // extend the grid until the topmost solver stays exact for every
        // larger guess after seeing `p`
        loop {
            let top = self
                .rungs
                .last()
                .and_then(|r| r.solver.as_ref())
                .expect("topmost guess is never pruned");
            let mut probe = top.clone();
            probe.process(p, &self.metric)?;
            if probe.valid_below() == f64::INFINITY {
                break;
            }
            let guess = self.guess(self.rungs.len());
            if !guess.is_finite() {
                return Err(Error::InvalidInput("radius grid diverged".into()));
            }
            let next = top.relabelled(guess);
            self.push_rung(guess, next);
        }
        for rung in &mut self.rungs {
            let Some(solver) = rung.solver.as_mut() else {
                continue;
            };
            solver.process(p, &self.metric)?;
            rung.peak_stored = rung.peak_stored.max(solver.peak_stored());
            rung.stats = solver.update_stats();
            if solver.is_overflowed() {
                rung.solver = None;
            }
        }
        Ok(())
    }

    fn track_storage(&mut self) {
        let total = self.buffer.len()
            + self
                .rungs
                .iter()
                .filter_map(|r| r.solver.as_ref())
                .map(Solver::stored_points)
                .sum::<usize>();
        self.stats.peak_stored_total = self.stats.peak_stored_total.max(total);
    }

    /// Finalizes guesses from the smallest upwards and returns the first
    /// feasible one.
    pub fn finish(mut self) -> Result<LadderResult> {
        if self.stats.points == 0 {
            return Err(Error::Empty("point stream"));
        }
        if self.is_bootstrapping() {
            return self.finish_from_buffer();
        }
        let mut discarded = 0;
        for rung in &self.rungs {
            let Some(solver) = rung.solver.as_ref() else {
                discarded += 1;
                continue;
            };
            if let SolveOutcome::Feasible(centers) = solver.finalize(&self.metric) {
                return Ok(LadderResult {
                    best_guess: rung.guess,
                    centers,
                    cost: None,
                    discarded,
                    stats: self.stats(),
                });
            }
            discarded += 1;
        }
        // Larger guesses only change post-streaming comparisons; past the spread
        // of the stored points nothing changes any more.
        let top = self
            .rungs
            .last()
            .and_then(|r| r.solver.clone())
            .expect("topmost guess is never pruned");
        let spread = top.stored_spread(&self.metric);
        loop {
            let guess = self.guess(self.rungs.len());
            let solver = top.relabelled(guess);
            let outcome = solver.finalize(&self.metric);
            self.push_rung(guess, solver);
            if let SolveOutcome::Feasible(centers) = outcome {
                return Ok(LadderResult {
                    best_guess: guess,
                    centers,
                    cost: None,
                    discarded,
                    stats: self.stats(),
                });
            }
            discarded += 1;
            if guess > spread || !guess.is_finite() {
                return Err(Error::Infeasible(
                    "no radius guess admits a center set within the caps".into(),
                ));
            }
        }
    }

    fn finish_from_buffer(&self) -> Result<LadderResult> {
        let mut radii = alloc::vec![0.0];
        for (i, p) in self.buffer.iter().enumerate() {
            for q in &self.buffer[i + 1..] {
                radii.push(self.metric.distance(&p.coords, &q.coords));
            }
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for (discarded, &r) in radii.iter().enumerate() {
            let outcome = run_known(r, &self.buffer, &self.spec, self.mode, &self.metric)?;
            if let SolveOutcome::Feasible(centers) = outcome {
                let mut stats = self.stats();
                stats.instances = discarded + 1;
                stats.pruned = discarded;
                stats.live = 1;
                stats.low = radii[0];
                stats.high = r;
                return Ok(LadderResult {
                    best_guess: r,
                    centers,
                    cost: None,
                    discarded,
                    stats,
                });
            }
        }
        Err(Error::Infeasible(
            "no center set within the caps covers the input".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{clustering_cost, Euclidean};
    use alloc::vec;

    fn pts(xs: &[(f64, usize)]) -> Vec<Point> {
        xs.iter()
            .enumerate()
            .map(|(i, &(x, g))| Point::new(i as u64, vec![x], g))
            .collect()
    }

    fn spec(a: usize, b: usize) -> FairnessSpec {
        FairnessSpec::new(vec![a, b]).unwrap()
    }

    fn ladder(points: &[Point], caps: (usize, usize), mode: Mode) -> Result<LadderResult> {
        let mut l = Ladder::new(spec(caps.0, caps.1), mode, 0.1, Euclidean).unwrap();
        for p in points {
            l.observe(p)?;
        }
        l.finish()
    }

    #[test]
    fn bootstrap_buffers_first_points() {
        let mut l = Ladder::new(spec(1, 1), Mode::General, 0.1, Euclidean).unwrap();
        let points = pts(&[(0.0, 1), (10.0, 2), (20.0, 1), (30.0, 2)]);
        l.observe(&points[0]).unwrap();
        l.observe(&points[1]).unwrap();
        assert!(l.is_bootstrapping());
        assert_eq!(l.buffered().len(), 2);
        l.observe(&points[2]).unwrap();
        assert!(!l.is_bootstrapping());
        // δ = 10 over {0, 10, 20}
        assert_eq!(l.stats().low, 5.0);
    }

    #[test]
    fn duplicates_do_not_count_towards_bootstrap() {
        let mut l = Ladder::new(spec(1, 1), Mode::General, 0.1, Euclidean).unwrap();
        for p in pts(&[(0.0, 1), (0.0, 1), (0.0, 1), (0.0, 2)]) {
            l.observe(&p).unwrap();
        }
        assert!(l.is_bootstrapping());
        assert_eq!(l.buffered().len(), 2);
    }

    #[test]
    fn single_point() {
        let r = ladder(&pts(&[(3.0, 2)]), (1, 1), Mode::General).unwrap();
        assert_eq!(r.best_guess, 0.0);
        assert_eq!(r.centers.ids(), vec![0]);
    }

    #[test]
    fn all_coincident() {
        let points = pts(&[(1.0, 1), (1.0, 1), (1.0, 2), (1.0, 1)]);
        let r = ladder(&points, (1, 1), Mode::General).unwrap();
        assert_eq!(r.best_guess, 0.0);
        assert_eq!(clustering_cost(&points, &r.centers, &Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn overflowed_guesses_are_pruned() {
        let mut points = Vec::new();
        for i in 0..40 {
            points.push(Point::new(i, vec![(i as f64) * 3.0], 1 + (i as usize % 2)));
        }
        let mut l = Ladder::new(spec(1, 1), Mode::General, 0.1, Euclidean).unwrap();
        for p in &points {
            l.observe(p).unwrap();
        }
        let stats = l.stats();
        assert!(stats.pruned > 0);
        // a pruned guess never comes back
        let live: Vec<_> = l.guesses();
        let first_live = live.iter().position(|g| g.1).unwrap();
        assert!(live[first_live..].iter().all(|g| g.1));
        let r = l.finish().unwrap();
        let cost = clustering_cost(&points, &r.centers, &Euclidean).unwrap();
        // two centers over [0, 117]: r* is about 29
        assert!(cost <= 5.0 * 1.1 * 30.0);
    }

    #[test]
    fn semi_order_enforced() {
        let points = pts(&[(0.0, 1), (5.0, 2), (9.0, 1)]);
        assert_eq!(
            ladder(&points, (1, 1), Mode::Semi),
            Err(Error::StreamOrder { id: 2 })
        );
    }

    #[test]
    fn empty_stream() {
        assert_eq!(ladder(&[], (1, 1), Mode::General), Err(Error::Empty("point stream")));
    }

    #[test]
    fn infeasible_input() {
        // group 2 may not host a center and there are no group-1 points
        let points = pts(&[(0.0, 2), (10.0, 2), (20.0, 2), (40.0, 2)]);
        assert!(matches!(
            ladder(&points, (1, 0), Mode::General),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn grows_above_top_until_feasible() {
        // k_2 = 0 forces the group-2 point out, which needs a guess of about 100/3
        let points = pts(&[(0.0, 1), (0.5, 1), (100.0, 2)]);
        let r = ladder(&points, (1, 0), Mode::General).unwrap();
        assert_eq!(r.centers.ids(), vec![0]);
        assert!(r.best_guess >= 100.0 / 3.0);
    }

    #[test]
    fn run_known_case1_at_diameter() {
        let points = pts(&[(0.0, 1), (3.0, 1), (1.0, 2), (4.0, 2)]);
        let out = run_known(4.0, &points, &spec(1, 1), Mode::General, &Euclidean).unwrap();
        assert_eq!(out.centers().unwrap().ids(), vec![0, 2]);
    }

    #[test]
    fn run_known_rejects_mixed_dimensions() {
        let points = vec![Point::new(0, vec![0.0], 1), Point::new(1, vec![0.0, 1.0], 1)];
        assert!(matches!(
            run_known(1.0, &points, &spec(1, 1), Mode::General, &Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
