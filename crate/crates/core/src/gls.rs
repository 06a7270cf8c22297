//! Guided Local Search with alternating optimization and perturbation phases.
//!
//! The aspects are the `n(n-1)/2` undirected edges. The optimization phase
//! runs the full local search on the tour cost `g`. The perturbation phase
//! repeatedly penalizes the tour edges of maximum utility
//! `c_ij / (1 + p_ij)` and, for each penalized edge, applies the best move
//! that removes it if that move improves the augmented cost
//! `h = g + lambda * sum(p_ij)` over the tour edges. The phase ends once `K`
//! such moves have been applied, then the next optimization phase starts.
//!
//! The guide cost `c_ij` is either the edge weight or a regret matrix.
//! `lambda` is set once, after the first optimization phase, to
//! `alpha * g(first local optimum) / n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::construct::{nearest_neighbor, regret_greedy};
use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;
use crate::regret::RegretMatrix;
use crate::search::{local_search_with, restricted_local_search, Objective};
use crate::tour::{tour_cost, Tour};

/// Two objective values closer than this are the same solution quality.
pub const OPTIMAL_ABS_TOL: f64 = 1e-7;

/// Relative tolerance under which two utilities count as tied.
pub const UTILITY_TIE_RTOL: f64 = 1e-12;

/// Source of the per-edge cost `c_ij` used to pick edges to penalize.
#[derive(Debug, Clone)]
pub enum Guide {
    /// `c_ij = w_ij`, the classical GLS guide for the TSP. The initial tour
    /// is built by nearest neighbor.
    Weight,
    /// `c_ij = max(r_ij, 0)`. The initial tour is built greedily on regret.
    Regret(RegretMatrix),
}

impl Guide {
    pub fn name(&self) -> &'static str {
        match self {
            Guide::Weight => "weight",
            Guide::Regret(_) => "regret",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyMode {
    /// Penalize every edge tied for the maximum utility.
    #[default]
    AllTied,
    /// Penalize only the lowest-id edge among the tied ones.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Improving moves under `h` per perturbation phase.
    pub k: usize,
    /// `lambda = lambda_alpha * g(first local optimum) / n`.
    pub lambda_alpha: f64,
    pub time_budget: Duration,
    pub penalty_mode: PenaltyMode,
    pub start_node: usize,
    /// Stop as soon as the best tour is within [`OPTIMAL_ABS_TOL`] of this
    /// cost. Since the best cost never increases, the result at the budget
    /// is already known at that point.
    pub stop_at_cost: Option<f64>,
    /// Keep the sequence of penalized edge sets in the outcome.
    pub record_penalties: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            k: 20,
            lambda_alpha: 0.1,
            time_budget: Duration::from_secs(10),
            penalty_mode: PenaltyMode::AllTied,
            start_node: 0,
            stop_at_cost: None,
            record_penalties: false,
        }
    }
}

impl SolveParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        // alpha = 0 is allowed and switches the penalties off
        if !(self.lambda_alpha >= 0.0) || !self.lambda_alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda alpha must be a finite nonnegative number, got {}",
                self.lambda_alpha
            )));
        }
        if self.time_budget.is_zero() {
            return Err(Error::InvalidArgument("time budget must be positive".into()));
        }
        if self.start_node >= n {
            return Err(Error::NodeOutOfRange {
                index: self.start_node,
                n,
            });
        }
        Ok(())
    }
}

pub fn compute_lambda(n: usize, first_local_opt_cost: f64, alpha: f64) -> f64 {
    alpha * first_local_opt_cost / n as f64
}

/// Penalties, guide costs and the scaling parameter of one GLS run.
#[derive(Debug, Clone)]
pub struct GuidedSearchState {
    n: usize,
    penalties: Vec<u32>,
    guide_costs: Vec<f64>,
    pub lambda: f64,
    pub moves_in_phase: usize,
}

impl GuidedSearchState {
    pub fn new(dm: &DistanceMatrix, guide: &Guide) -> Self {
        let n = dm.n();
        let mut guide_costs = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    guide_costs[i * n + j] = match guide {
                        Guide::Weight => dm.get(i, j),
                        Guide::Regret(r) => r.get(i, j).max(0.0),
                    };
                }
            }
        }
        GuidedSearchState {
            n,
            penalties: vec![0; n * n],
            guide_costs,
            lambda: 0.0,
            moves_in_phase: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn penalty(&self, i: usize, j: usize) -> u32 {
        self.penalties[i * self.n + j]
    }

    pub fn set_penalty(&mut self, i: usize, j: usize, p: u32) {
        self.penalties[i * self.n + j] = p;
        self.penalties[j * self.n + i] = p;
    }

    #[inline]
    pub fn guide_cost(&self, i: usize, j: usize) -> f64 {
        self.guide_costs[i * self.n + j]
    }

    /// `util_ij = I_ij(t) * c_ij / (1 + p_ij)` for every tour edge, in tour
    /// order. Edges outside the tour have zero utility and are omitted.
    pub fn utility(&self, t: &Tour) -> Vec<((usize, usize), f64)> {
        t.edges()
            .into_iter()
            .map(|(i, j)| ((i, j), self.guide_cost(i, j) / (1.0 + self.penalty(i, j) as f64)))
            .collect()
    }

    /// Increments the penalty of the maximum-utility tour edges and returns
    /// them sorted by `(min, max)` node id.
    pub fn penalize(&mut self, t: &Tour, mode: PenaltyMode) -> Vec<(usize, usize)> {
        let utils = self.utility(t);
        let max = utils.iter().map(|&(_, u)| u).fold(f64::NEG_INFINITY, f64::max);
        let cutoff = max - UTILITY_TIE_RTOL * max.abs();
        let mut chosen: Vec<(usize, usize)> = utils
            .into_iter()
            .filter(|&(_, u)| u >= cutoff)
            .map(|(e, _)| e)
            .collect();
        chosen.sort_unstable();
        chosen.dedup();
        if mode == PenaltyMode::Single {
            chosen.truncate(1);
        }
        for &(i, j) in &chosen {
            let p = self.penalty(i, j).saturating_add(1);
            self.set_penalty(i, j, p);
        }
        chosen
    }

    pub fn penalty_sum(&self, t: &Tour) -> u64 {
        t.edges().into_iter().map(|(i, j)| self.penalty(i, j) as u64).sum()
    }
}

/// The augmented objective `h`: edge weight plus `lambda` times the penalty.
pub struct AugmentedCosts<'a> {
    pub dm: &'a DistanceMatrix,
    pub state: &'a GuidedSearchState,
}

impl Objective for AugmentedCosts<'_> {
    #[inline]
    fn edge_cost(&self, a: usize, b: usize) -> f64 {
        self.dm.get(a, b) + self.state.lambda * self.state.penalty(a, b) as f64
    }
}

/// `h(t) = g(t) + lambda * sum of penalties on the tour edges`.
pub fn augmented_cost(dm: &DistanceMatrix, t: &Tour, state: &GuidedSearchState) -> f64 {
    tour_cost(dm, t) + state.lambda * state.penalty_sum(t) as f64
}

/// Best cost over time for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    /// `(elapsed seconds, best cost)` with strictly increasing times and
    /// non-increasing costs.
    pub samples: Vec<(f64, f64)>,
    pub best_tour: Tour,
}

impl ConvergenceTrace {
    pub fn final_cost(&self) -> f64 {
        self.samples.last().map_or(f64::INFINITY, |&(_, c)| c)
    }

    /// Best cost known at time `t`; before the first sample this is the
    /// first (initial solution) cost.
    pub fn cost_at(&self, t: f64) -> f64 {
        let idx = self.samples.partition_point(|&(s, _)| s <= t);
        if idx == 0 {
            self.samples[0].1
        } else {
            self.samples[idx - 1].1
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("elapsed_s,best_cost\n");
        for &(t, c) in &self.samples {
            let _ = writeln!(out, "{t:?},{c:?}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::file(path, e))
    }

    fn push(&mut self, t: f64, cost: f64) {
        match self.samples.last_mut() {
            Some(last) if t <= last.0 => last.1 = last.1.min(cost),
            _ => self.samples.push((t, cost)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GlsStats {
    pub optimization_phases: usize,
    pub perturbation_phases: usize,
    pub perturbation_moves: usize,
    pub penalty_events: usize,
}

#[derive(Debug, Clone)]
pub struct GlsOutcome {
    pub tour: Tour,
    pub cost: f64,
    pub trace: ConvergenceTrace,
    pub lambda: f64,
    /// Penalized edge sets in order, when requested.
    pub penalty_log: Vec<Vec<(usize, usize)>>,
    pub stats: GlsStats,
    /// Penalty state at the end of the run.
    pub state: GuidedSearchState,
}

struct BestTracker<'a> {
    dm: &'a DistanceMatrix,
    clock: Instant,
    best_cost: f64,
    trace: ConvergenceTrace,
    target: Option<f64>,
}

impl BestTracker<'_> {
    fn offer(&mut self, t: &Tour) {
        let cost = tour_cost(self.dm, t);
        if cost < self.best_cost {
            self.best_cost = cost;
            self.trace.best_tour = t.clone();
            self.trace.push(self.clock.elapsed().as_secs_f64(), cost);
        }
    }

    fn reached_target(&self) -> bool {
        self.target
            .is_some_and(|target| self.best_cost <= target + OPTIMAL_ABS_TOL)
    }
}

/// Runs GLS until `deadline`; trace times are measured from `clock`.
pub fn guided_local_search(
    dm: &DistanceMatrix,
    guide: &Guide,
    params: &SolveParams,
    clock: Instant,
    deadline: Instant,
) -> Result<GlsOutcome> {
    let n = dm.n();
    params.validate(n)?;
    if let Guide::Regret(r) = guide {
        if r.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.n(),
            });
        }
    }
    let initial = match guide {
        Guide::Weight => nearest_neighbor(dm, params.start_node),
        Guide::Regret(r) => regret_greedy(dm, r, params.start_node),
    };
    let mut state = GuidedSearchState::new(dm, guide);
    let mut stats = GlsStats::default();
    let mut penalty_log = Vec::new();
    let mut tracker = BestTracker {
        dm,
        clock,
        best_cost: f64::INFINITY,
        trace: ConvergenceTrace {
            samples: Vec::new(),
            best_tour: initial.clone(),
        },
        target: params.stop_at_cost,
    };
    tracker.offer(&initial);

    let mut cur = initial;
    let out_of_time = || Instant::now() >= deadline;
    if !out_of_time() {
        local_search_with(dm, &mut cur, Some(deadline), |t, _| tracker.offer(t));
        stats.optimization_phases += 1;
        state.lambda = compute_lambda(n, tour_cost(dm, &cur), params.lambda_alpha);

        'solve: while !out_of_time() && !tracker.reached_target() {
            stats.perturbation_phases += 1;
            state.moves_in_phase = 0;
            while state.moves_in_phase < params.k {
                if out_of_time() || tracker.reached_target() {
                    break 'solve;
                }
                let penalized = state.penalize(&cur, params.penalty_mode);
                stats.penalty_events += 1;
                for &edge in &penalized {
                    let h = AugmentedCosts { dm, state: &state };
                    let out = restricted_local_search(&h, &cur, edge);
                    if out.applied.is_some() {
                        cur = out.tour;
                        state.moves_in_phase += 1;
                        stats.perturbation_moves += 1;
                        tracker.offer(&cur);
                        if state.moves_in_phase >= params.k {
                            break;
                        }
                    }
                }
                if params.record_penalties {
                    penalty_log.push(penalized);
                }
            }
            local_search_with(dm, &mut cur, Some(deadline), |t, _| tracker.offer(t));
            stats.optimization_phases += 1;
        }
    }

    let BestTracker {
        best_cost,
        mut trace,
        ..
    } = tracker;
    trace.push(clock.elapsed().as_secs_f64(), best_cost);
    Ok(GlsOutcome {
        tour: trace.best_tour.clone(),
        cost: best_cost,
        trace,
        lambda: state.lambda,
        penalty_log,
        stats,
        state,
    })
}

/// Runs GLS for `params.time_budget` starting now.
pub fn solve(dm: &DistanceMatrix, guide: &Guide, params: &SolveParams) -> Result<GlsOutcome> {
    let clock = Instant::now();
    guided_local_search(dm, guide, params, clock, clock + params.time_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::regret::{oracle, Provenance};
    use crate::search::local_search;

    fn quick(budget_ms: u64) -> SolveParams {
        SolveParams {
            time_budget: Duration::from_millis(budget_ms),
            ..SolveParams::default()
        }
    }

    #[test]
    fn zero_penalties_give_plain_cost() {
        let dm = Instance::random(12, 2).unwrap().distance_matrix();
        let mut state = GuidedSearchState::new(&dm, &Guide::Weight);
        state.lambda = 0.7;
        let t = Tour::identity(12);
        assert_eq!(augmented_cost(&dm, &t, &state), tour_cost(&dm, &t));
    }

    #[test]
    fn single_penalty_adds_lambda_times_p() {
        let dm = Instance::random(6, 2).unwrap().distance_matrix();
        let mut state = GuidedSearchState::new(&dm, &Guide::Weight);
        state.lambda = 0.5;
        state.set_penalty(2, 3, 2);
        let t = Tour::identity(6);
        assert!((augmented_cost(&dm, &t, &state) - (tour_cost(&dm, &t) + 1.0)).abs() < 1e-12);
        // edge (0, 3) is not in the identity tour
        state.set_penalty(0, 3, 5);
        assert!((augmented_cost(&dm, &t, &state) - (tour_cost(&dm, &t) + 1.0)).abs() < 1e-12);
        let h = AugmentedCosts { dm: &dm, state: &state };
        assert!((h.value(&t) - augmented_cost(&dm, &t, &state)).abs() < 1e-12);
    }

    #[test]
    fn utility_decays_with_penalties() {
        let dm = Instance::random(4, 0).unwrap().distance_matrix();
        let r = RegretMatrix::from_fn(4, Provenance::Predicted, |i, j| if (i, j) == (0, 1) { 0.5 } else { 0.1 });
        let mut state = GuidedSearchState::new(&dm, &Guide::Regret(r));
        let t = Tour::identity(4);
        let u = |s: &GuidedSearchState| s.utility(&t).into_iter().find(|&(e, _)| e == (0, 1)).unwrap().1;
        assert_eq!(u(&state), 0.5);
        assert_eq!(state.penalize(&t, PenaltyMode::AllTied), vec![(0, 1)]);
        assert_eq!(u(&state), 0.25);
        // (0, 2) is not a tour edge
        assert!(state.utility(&t).iter().all(|&(e, _)| e != (0, 2)));
    }

    #[test]
    fn tied_edges_all_penalized() {
        let dm = Instance::from_xy("sq", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
            .unwrap()
            .distance_matrix();
        let r = RegretMatrix::from_fn(4, Provenance::Predicted, |i, j| match (i, j) {
            (0, 1) | (2, 3) => 0.3,
            _ => 0.1,
        });
        let mut state = GuidedSearchState::new(&dm, &Guide::Regret(r.clone()));
        let t = Tour::identity(4);
        assert_eq!(state.penalize(&t, PenaltyMode::AllTied), vec![(0, 1), (2, 3)]);
        let mut single = GuidedSearchState::new(&dm, &Guide::Regret(r));
        assert_eq!(single.penalize(&t, PenaltyMode::Single), vec![(0, 1)]);
        assert_eq!(single.penalty(2, 3), 0);
    }

    #[test]
    fn negative_guide_costs_clamped() {
        let dm = Instance::random(5, 0).unwrap().distance_matrix();
        let r = RegretMatrix::from_fn(5, Provenance::Predicted, |_, _| -0.2);
        let state = GuidedSearchState::new(&dm, &Guide::Regret(r));
        assert_eq!(state.guide_cost(1, 3), 0.0);
    }

    #[test]
    fn lambda_rule() {
        assert!((compute_lambda(20, 10.0, 0.1) - 0.05).abs() < 1e-15);
        assert!((compute_lambda(20, 10.0, 0.3) - 3.0 * compute_lambda(20, 10.0, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn lambda_tracks_instance_scale() {
        let inst = Instance::random(30, 9).unwrap();
        let a = solve(&inst.distance_matrix(), &Guide::Weight, &quick(20)).unwrap();
        let b = solve(&inst.scaled(2.0).distance_matrix(), &Guide::Weight, &quick(20)).unwrap();
        assert!((b.lambda - 2.0 * a.lambda).abs() < 1e-9 * a.lambda);
    }

    #[test]
    fn expired_deadline_returns_initial_tour() {
        let dm = Instance::random(20, 1).unwrap().distance_matrix();
        let clock = Instant::now();
        let out = guided_local_search(&dm, &Guide::Weight, &quick(100), clock, clock).unwrap();
        assert_eq!(out.tour, nearest_neighbor(&dm, 0));
        assert_eq!(out.stats.optimization_phases, 0);
    }

    #[test]
    fn zero_lambda_cannot_escape() {
        let dm = Instance::random(40, 5).unwrap().distance_matrix();
        let params = SolveParams {
            lambda_alpha: 0.0,
            ..quick(100)
        };
        let out = solve(&dm, &Guide::Weight, &params).unwrap();
        let ls = local_search(&dm, &nearest_neighbor(&dm, 0), None);
        assert_eq!(out.cost, tour_cost(&dm, &ls));
        assert_eq!(out.stats.perturbation_moves, 0);
    }

    #[test]
    fn trace_monotone_and_penalties_symmetric() {
        let dm = Instance::random(40, 8).unwrap().distance_matrix();
        let out = solve(&dm, &Guide::Weight, &quick(200)).unwrap();
        let s = &out.trace.samples;
        assert!(s.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
        assert_eq!(out.trace.final_cost(), out.cost);
        assert!((tour_cost(&dm, &out.tour) - out.cost).abs() < 1e-12);
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(out.state.penalty(i, j), out.state.penalty(j, i));
            }
        }
        assert!(out.stats.penalty_events > 0);
    }

    #[test]
    fn oracle_guide_finds_optimum_small() {
        let dm = Instance::random(10, 4).unwrap().distance_matrix();
        let sol = oracle(&dm).unwrap();
        let params = SolveParams {
            stop_at_cost: Some(sol.cost),
            ..quick(2000)
        };
        let out = solve(&dm, &Guide::Regret(sol.regret), &params).unwrap();
        assert!((out.cost - sol.cost).abs() <= OPTIMAL_ABS_TOL);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let dm = Instance::random(10, 4).unwrap().distance_matrix();
        let r = RegretMatrix::from_fn(9, Provenance::Predicted, |_, _| 0.0);
        assert!(matches!(
            solve(&dm, &Guide::Regret(r), &quick(10)),
            Err(Error::DimensionMismatch { expected: 10, found: 9 })
        ));
    }
}
