//! One-pass fair k-center for two groups with a known radius guess `r̂`.
//!
//! The streaming stage keeps one [`IndependentSet`] per group at `λ = 2r̂`.
//! After the stream ends the sizes of `Γ_1` and `Γ_2` against the caps select
//! one of three cases:
//!
//! 1. both within their caps: `C = Γ_1 ∪ Γ_2`, cost at most `2r̂`;
//! 2. exactly one group `l` over its cap: keep `Γ_{3-l}` and only those members of
//!    `Γ_l` farther than `3r̂` from it;
//! 3. both over: select centers on the bipartite graph joining members of
//!    different groups within `3r̂` (see [`solve_case3`]).
//!
//! When `r̂ ≥ r*` the result is feasible with cost at most `5r̂`. For smaller
//! guesses the solver either succeeds anyway or returns an
//! [`Infeasibility`] certificate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::independent::{IndependentSet, Offer};
use crate::metric::{check_fairness, min_distance, CenterSet, FairnessSpec, Metric, Point};

/// Why a guess produced no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// A per-group independent set outgrew `k`, so `2r̂ < 2r*`.
    StreamOverflow,
    /// The auxiliary-graph loop stopped with more than `k` centers.
    Case3Exhausted,
    /// The assembled center set breaks a group cap.
    FairnessViolated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Feasible(CenterSet),
    Infeasible(Infeasibility),
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }

    pub fn centers(&self) -> Option<&CenterSet> {
        match self {
            SolveOutcome::Feasible(c) => Some(c),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_centers(self) -> Option<CenterSet> {
        match self {
            SolveOutcome::Feasible(c) => Some(c),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    /// Wraps a candidate, downgrading it if it breaks the caps.
    pub(crate) fn checked(centers: CenterSet, spec: &FairnessSpec) -> Self {
        if check_fairness(&centers, spec).is_feasible() {
            SolveOutcome::Feasible(centers)
        } else {
            SolveOutcome::Infeasible(Infeasibility::FairnessViolated)
        }
    }
}

/// Post-streaming regime, decided by `|Γ_l|` against `k_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    One,
    /// Only group `over` exceeds its cap.
    Two { over: usize },
    Three,
}

/// Per-point update accounting: distance evaluations against the number of
/// stored representatives at the moment the point arrived.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateStats {
    pub processed: u64,
    pub distance_evals: u64,
    /// Largest number of evaluations spent on one point.
    pub max_evals: u64,
    /// Points whose evaluations exceeded the allowed bound.
    pub over_budget: u64,
}

impl UpdateStats {
    pub(crate) fn record(&mut self, evals: u64, bound: u64) {
        self.processed += 1;
        self.distance_evals += evals;
        self.max_evals = self.max_evals.max(evals);
        if evals > bound {
            self.over_budget += 1;
        }
    }
}

/// Streaming state for one radius guess.
#[derive(Debug, Clone)]
pub struct StreamInstance {
    r_hat: f64,
    spec: FairnessSpec,
    gamma: [IndependentSet; 2],
    stats: UpdateStats,
    peak_stored: usize,
}

impl StreamInstance {
    pub fn new(r_hat: f64, spec: FairnessSpec) -> Result<Self> {
        spec.require_groups(2)?;
        if !(r_hat >= 0.0 && r_hat.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "radius guess must be finite and non-negative, got {r_hat}"
            )));
        }
        let k = spec.k();
        let gamma = [1, 2].map(|g| IndependentSet::new(2.0 * r_hat).with_cap(k).for_group(g));
        Ok(StreamInstance {
            r_hat,
            spec,
            gamma,
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

    pub fn spec(&self) -> &FairnessSpec {
        &self.spec
    }

    /// `Γ_group` for `group ∈ {1, 2}`.
    pub fn gamma(&self, group: usize) -> &IndependentSet {
        &self.gamma[group - 1]
    }

    pub fn is_overflowed(&self) -> bool {
        self.gamma.iter().any(IndependentSet::is_overflowed)
    }

    pub fn stored_points(&self) -> usize {
        self.gamma.iter().map(IndependentSet::len).sum()
    }

    pub fn peak_stored(&self) -> usize {
        self.peak_stored
    }

    pub fn update_stats(&self) -> UpdateStats {
        self.stats
    }

    pub fn process<M: Metric + ?Sized>(&mut self, p: &Point, metric: &M) -> Result<()> {
        if p.group != 1 && p.group != 2 {
            return Err(Error::UnknownGroup {
                group: p.group,
                groups: 2,
            });
        }
        if self.is_overflowed() {
            return Ok(());
        }
        let bound = self.stored_points() as u64;
        let set = &mut self.gamma[p.group - 1];
        let before = set.distance_evals();
        let outcome = set.offer(p, metric)?;
        let evals = set.distance_evals() - before;
        self.stats.record(evals, bound);
        if outcome == Offer::Overflow {
            for g in &mut self.gamma {
                g.clear();
            }
        }
        self.peak_stored = self.peak_stored.max(self.stored_points());
        Ok(())
    }

    /// Largest guess for which this exact state would also have been produced:
    /// any `r' ∈ [r̂, valid_below)` replays to the same sets.
    pub(crate) fn valid_below(&self) -> f64 {
        self.gamma
            .iter()
            .map(|g| g.split_distance() / 2.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn relabelled(&self, r_hat: f64) -> Self {
        StreamInstance {
            r_hat,
            gamma: [0, 1].map(|i| self.gamma[i].relabelled(2.0 * r_hat)),
            ..self.clone()
        }
    }

    pub(crate) fn stored(&self) -> impl Iterator<Item = &Point> {
        self.gamma.iter().flat_map(|g| g.members())
    }

    pub fn case(&self) -> Case {
        let over = |g: usize| self.gamma[g - 1].len() > self.spec.cap(g);
        match (over(1), over(2)) {
            (false, false) => Case::One,
            (true, false) => Case::Two { over: 1 },
            (false, true) => Case::Two { over: 2 },
            (true, true) => Case::Three,
        }
    }

    pub fn finalize<M: Metric + ?Sized>(&self, metric: &M) -> SolveOutcome {
        self.finalize_traced(metric, None)
    }

    /// [`finalize`](Self::finalize), recording the auxiliary-graph loop when
    /// Case 3 runs.
    pub fn finalize_traced<M: Metric + ?Sized>(
        &self,
        metric: &M,
        trace: Option<&mut Case3Trace>,
    ) -> SolveOutcome {
        if self.is_overflowed() {
            return SolveOutcome::Infeasible(Infeasibility::StreamOverflow);
        }
        match self.case() {
            Case::One => {
                let centers = self.stored().cloned().collect();
                SolveOutcome::checked(CenterSet::from_trusted(centers, 2), &self.spec)
            }
            Case::Two { over } => solve_case2(
                over,
                self.gamma(over).members(),
                self.gamma(3 - over).members(),
                self.r_hat,
                &self.spec,
                metric,
            ),
            Case::Three => {
                let graph = AuxGraph::build(
                    self.gamma(1).members(),
                    self.gamma(2).members(),
                    self.r_hat,
                    metric,
                );
                solve_case3(graph, &self.spec, self.r_hat, metric, trace)
            }
        }
    }
}

/// Case 2: group `over` exceeds its cap, the other group does not.
///
/// Keeps `Γ_{3-l}` whole and adds `Γ'_l = {i ∈ Γ_l : d(i, Γ_{3-l}) > 3r̂}`.
pub fn solve_case2<M: Metric + ?Sized>(
    over: usize,
    gamma_over: &[Point],
    gamma_under: &[Point],
    r_hat: f64,
    spec: &FairnessSpec,
    metric: &M,
) -> SolveOutcome {
    let reach = 3.0 * r_hat;
    let kept: Vec<Point> = gamma_over
        .iter()
        .filter(|i| min_distance(i, gamma_under, metric) > reach)
        .cloned()
        .collect();
    if kept.len() > spec.cap(over) {
        return SolveOutcome::Infeasible(Infeasibility::FairnessViolated);
    }
    let mut centers = gamma_under.to_vec();
    centers.extend(kept);
    SolveOutcome::checked(CenterSet::from_trusted(centers, 2), spec)
}

/// Bipartite graph on `Γ_1 ∪ Γ_2` with an edge between members of different
/// groups at distance at most `3r̂`, plus the live-vertex bookkeeping used while
/// centers are picked.
///
/// Vertices `0..left` are `Γ_1` in arrival order, the rest `Γ_2`.
#[derive(Debug, Clone)]
pub struct AuxGraph {
    vertices: Vec<Point>,
    left: usize,
    adj: Vec<Vec<usize>>,
    live: Vec<bool>,
    degree: Vec<usize>,
}

impl AuxGraph {
    pub fn build<M: Metric + ?Sized>(
        gamma1: &[Point],
        gamma2: &[Point],
        r_hat: f64,
        metric: &M,
    ) -> Self {
        let left = gamma1.len();
        let n = left + gamma2.len();
        let mut adj = vec![Vec::new(); n];
        let reach = 3.0 * r_hat;
        for (i, p) in gamma1.iter().enumerate() {
            for (j, q) in gamma2.iter().enumerate() {
                if metric.distance(&p.coords, &q.coords) <= reach {
                    adj[i].push(left + j);
                    adj[left + j].push(i);
                }
            }
        }
        let degree = adj.iter().map(Vec::len).collect();
        let mut vertices = gamma1.to_vec();
        vertices.extend_from_slice(gamma2);
        AuxGraph {
            vertices,
            left,
            adj,
            live: vec![true; n],
            degree,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj[..self.left].iter().map(Vec::len).sum()
    }

    /// Edges as `(group-1 id, group-2 id)` pairs, sorted.
    pub fn edge_ids(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<_> = (0..self.left)
            .flat_map(|i| self.adj[i].iter().map(move |&j| (i, j)))
            .map(|(i, j)| (self.vertices[i].id, self.vertices[j].id))
            .collect();
        out.sort_unstable();
        out
    }

    /// Degree of the vertex carrying point `id` in the original graph.
    pub fn degree_of(&self, id: u64) -> Option<usize> {
        self.vertices
            .iter()
            .position(|p| p.id == id)
            .map(|v| self.adj[v].len())
    }

    fn group(&self, v: usize) -> usize {
        if v < self.left {
            1
        } else {
            2
        }
    }

    fn remove(&mut self, v: usize) {
        if !self.live[v] {
            return;
        }
        self.live[v] = false;
        for &u in &self.adj[v] {
            if self.live[u] {
                self.degree[u] -= 1;
            }
        }
    }

    fn live_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.live[v])
    }

    fn live_in_group(&self, g: usize) -> usize {
        self.live_vertices().filter(|&v| self.group(v) == g).count()
    }

    fn live_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied().filter(|&u| self.live[u])
    }

    /// Live edge with the lexicographically smallest `(group-1 id, group-2 id)`.
    fn smallest_live_edge(&self) -> Option<(usize, usize)> {
        (0..self.left)
            .filter(|&i| self.live[i])
            .flat_map(|i| self.live_neighbours(i).map(move |j| (i, j)))
            .min_by_key(|&(i, j)| (self.vertices[i].id, self.vertices[j].id))
    }
}

/// Which Phase-2 rule an iteration used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case3Branch {
    /// No degree-1 vertex: one endpoint of an edge joined `C`.
    EdgePick,
    /// The vertex with the most degree-1 neighbours joined `C`.
    LeafCover,
}

/// State at the start of one Phase-2 iteration, plus what it removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case3Step {
    pub centers: usize,
    /// Live vertices of group 1 and group 2 (`|Γ^j_1|`, `|Γ^j_2|`).
    pub live: [usize; 2],
    pub branch: Case3Branch,
    pub removed: usize,
    /// Live vertices of degree 0 right after the removal.
    pub isolated_after: usize,
}

/// Instrumentation of one [`solve_case3`] run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Case3Trace {
    pub vertices: usize,
    pub edges: usize,
    pub phase1_centers: usize,
    pub steps: Vec<Case3Step>,
    /// Whether the run ended through the early `C ∪ Γ_l ∪ Γ'_{3-l}` return.
    pub early_exit: bool,
}

/// Case 3: both groups exceed their caps.
///
/// Phase 1 takes every isolated vertex not already within `2r̂` of `C` and drops
/// all isolated vertices. Phase 2 repeats while `|C| ≤ k` and vertices remain:
/// with no degree-1 vertex it takes one endpoint of the smallest live edge (the
/// endpoint whose group has more remaining slack, group 1 on ties) and drops
/// both endpoints; otherwise it takes the vertex with the most degree-1
/// neighbours (smallest id on ties) and drops it with those neighbours. After
/// every pick, if some group `l` satisfies `|C ∩ S_l| + |Γ_l| ≤ k_l` the answer is
/// `C ∪ Γ_l` plus the members of `Γ_{3-l}` farther than `3r̂` from it.
pub fn solve_case3<M: Metric + ?Sized>(
    mut graph: AuxGraph,
    spec: &FairnessSpec,
    r_hat: f64,
    metric: &M,
    mut trace: Option<&mut Case3Trace>,
) -> SolveOutcome {
    let n = graph.vertex_count();
    if let Some(t) = trace.as_deref_mut() {
        *t = Case3Trace {
            vertices: n,
            edges: graph.edge_count(),
            ..Case3Trace::default()
        };
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut counts = [0usize; 2];

    // Phase 1
    for v in 0..n {
        if graph.degree[v] == 0 {
            let p = &graph.vertices[v];
            let d = min_distance(p, chosen.iter().map(|&c| &graph.vertices[c]), metric);
            if d > 2.0 * r_hat {
                chosen.push(v);
                counts[graph.group(v) - 1] += 1;
            }
        }
    }
    for v in 0..n {
        if graph.live[v] && graph.degree[v] == 0 {
            graph.remove(v);
        }
    }
    if let Some(t) = trace.as_deref_mut() {
        t.phase1_centers = chosen.len();
    }

    if let Some(out) = early_exit(&graph, &chosen, counts, spec, r_hat, metric) {
        if let Some(t) = trace.as_deref_mut() {
            t.early_exit = true;
        }
        return out;
    }

    // Phase 2
    let k = spec.k();
    while chosen.len() <= k && graph.live.iter().any(|&l| l) {
        let live = [graph.live_in_group(1), graph.live_in_group(2)];
        let centers = chosen.len();
        let has_leaf = graph.live_vertices().any(|v| graph.degree[v] == 1);
        let (branch, removed) = if !has_leaf {
            match graph.smallest_live_edge() {
                Some((p, q)) => {
                    let slack = |g: usize| spec.cap(g) as i64 - counts[g - 1] as i64;
                    let (pick, other) = if slack(2) > slack(1) { (q, p) } else { (p, q) };
                    chosen.push(pick);
                    counts[graph.group(pick) - 1] += 1;
                    graph.remove(pick);
                    graph.remove(other);
                    (Case3Branch::EdgePick, 2)
                }
                None => {
                    // Only isolated vertices are left; removals never create
                    // them, so this is unreachable after Phase 1.
                    debug_assert!(false, "isolated vertex in phase 2");
                    let rest: Vec<usize> = graph.live_vertices().collect();
                    for &v in &rest {
                        chosen.push(v);
                        counts[graph.group(v) - 1] += 1;
                        graph.remove(v);
                    }
                    (Case3Branch::EdgePick, rest.len())
                }
            }
        } else {
            let mut leaves = vec![0usize; n];
            for v in graph.live_vertices() {
                if graph.degree[v] == 1 {
                    if let Some(u) = graph.live_neighbours(v).next() {
                        leaves[u] += 1;
                    }
                }
            }
            let pick = graph
                .live_vertices()
                .max_by(|&a, &b| {
                    leaves[a]
                        .cmp(&leaves[b])
                        .then(graph.vertices[b].id.cmp(&graph.vertices[a].id))
                })
                .expect("a live vertex exists");
            let hanging: Vec<usize> = graph
                .live_neighbours(pick)
                .filter(|&u| graph.degree[u] == 1)
                .collect();
            chosen.push(pick);
            counts[graph.group(pick) - 1] += 1;
            graph.remove(pick);
            for &u in &hanging {
                graph.remove(u);
            }
            (Case3Branch::LeafCover, 1 + hanging.len())
        };
        if let Some(t) = trace.as_deref_mut() {
            let isolated_after = graph.live_vertices().filter(|&v| graph.degree[v] == 0).count();
            t.steps.push(Case3Step {
                centers,
                live,
                branch,
                removed,
                isolated_after,
            });
        }
        if let Some(out) = early_exit(&graph, &chosen, counts, spec, r_hat, metric) {
            if let Some(t) = trace.as_deref_mut() {
                t.early_exit = true;
            }
            return out;
        }
    }

    if chosen.len() > k {
        return SolveOutcome::Infeasible(Infeasibility::Case3Exhausted);
    }
    let centers = chosen.iter().map(|&v| graph.vertices[v].clone()).collect();
    SolveOutcome::checked(CenterSet::from_trusted(centers, 2), spec)
}

/// The `|C ∩ S_l| + |Γ_l| ≤ k_l` return. Groups are tried in order; the first
/// whose assembled set respects the caps wins.
fn early_exit<M: Metric + ?Sized>(
    graph: &AuxGraph,
    chosen: &[usize],
    counts: [usize; 2],
    spec: &FairnessSpec,
    r_hat: f64,
    metric: &M,
) -> Option<SolveOutcome> {
    let mut fired = false;
    for l in [1, 2] {
        if counts[l - 1] + graph.live_in_group(l) > spec.cap(l) {
            continue;
        }
        fired = true;
        let mut centers: Vec<Point> = chosen.iter().map(|&v| graph.vertices[v].clone()).collect();
        centers.extend(
            graph
                .live_vertices()
                .filter(|&v| graph.group(v) == l)
                .map(|v| graph.vertices[v].clone()),
        );
        let far: Vec<Point> = graph
            .live_vertices()
            .filter(|&v| graph.group(v) == 3 - l)
            .map(|v| &graph.vertices[v])
            .filter(|p| min_distance(p, &centers, metric) > 3.0 * r_hat)
            .cloned()
            .collect();
        centers.extend(far);
        let out = SolveOutcome::checked(CenterSet::from_trusted(centers, 2), spec);
        if out.is_feasible() {
            return Some(out);
        }
    }
    fired.then_some(SolveOutcome::Infeasible(Infeasibility::FairnessViolated))
}
