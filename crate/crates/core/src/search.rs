//! Best-improvement local search over the 2-opt and relocate neighborhoods.
//!
//! The engine alternates between the two operators, starting with 2-opt.
//! Each step scans the whole neighborhood of the current operator and applies
//! the single best strictly improving move; the search stops once a scan of
//! each operator in a row finds nothing, or when the deadline has passed.
//! The deadline is only checked between scans.

use std::time::Instant;

use crate::instance::DistanceMatrix;
use crate::tour::{
    apply_move_in_place, delta_relocate, delta_two_opt, insertion_slot, objective_value, Move, Tour,
};

/// A move improves only if its delta is below `-IMPROVEMENT_EPS`.
pub const IMPROVEMENT_EPS: f64 = 1e-10;

/// A tour cost functional that decomposes over edges.
///
/// The plain objective is the [`DistanceMatrix`] itself; the penalty
/// augmented objective lives in [`crate::gls::AugmentedCosts`].
pub trait Objective {
    fn edge_cost(&self, a: usize, b: usize) -> f64;

    fn value(&self, t: &Tour) -> f64 {
        objective_value(self, t)
    }
}

impl Objective for DistanceMatrix {
    #[inline]
    fn edge_cost(&self, a: usize, b: usize) -> f64 {
        self.get(a, b)
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    #[inline]
    fn edge_cost(&self, a: usize, b: usize) -> f64 {
        (**self).edge_cost(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    TwoOpt,
    Relocate,
}

impl Neighborhood {
    fn other(self) -> Self {
        match self {
            Neighborhood::TwoOpt => Neighborhood::Relocate,
            Neighborhood::Relocate => Neighborhood::TwoOpt,
        }
    }
}

fn consider(best: &mut Option<(Move, f64)>, m: Move, delta: f64) {
    if delta < -IMPROVEMENT_EPS && best.is_none_or(|(_, d)| delta < d) {
        *best = Some((m, delta));
    }
}

/// Best strictly improving 2-opt move, first found on ties.
pub fn best_two_opt<O: Objective + ?Sized>(obj: &O, t: &Tour) -> Option<(Move, f64)> {
    let n = t.len();
    let mut best = None;
    for a in 0..n - 2 {
        let b_end = if a == 0 { n - 1 } else { n };
        for b in a + 2..b_end {
            consider(&mut best, Move::TwoOpt { a, b }, delta_two_opt(obj, t, a, b));
        }
    }
    best
}

/// Best strictly improving relocate move, first found on ties.
pub fn best_relocate<O: Objective + ?Sized>(obj: &O, t: &Tour) -> Option<(Move, f64)> {
    let n = t.len();
    let m = n - 1;
    let mut best = None;
    for from in 0..n {
        for to in 0..m {
            if to == from % m {
                continue;
            }
            consider(&mut best, Move::Relocate { from, to }, delta_relocate(obj, t, from, to));
        }
    }
    best
}

pub fn best_move<O: Objective + ?Sized>(obj: &O, t: &Tour, hood: Neighborhood) -> Option<(Move, f64)> {
    match hood {
        Neighborhood::TwoOpt => best_two_opt(obj, t),
        Neighborhood::Relocate => best_relocate(obj, t),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub moves: usize,
    pub scans: usize,
    /// True when the search stopped on the deadline rather than at a local optimum.
    pub timed_out: bool,
}

/// Runs best-improvement local search in place, calling `on_accept` after
/// every applied move.
pub fn local_search_with<O, F>(
    obj: &O,
    tour: &mut Tour,
    deadline: Option<Instant>,
    mut on_accept: F,
) -> SearchStats
where
    O: Objective + ?Sized,
    F: FnMut(&Tour, Move),
{
    let mut stats = SearchStats::default();
    let mut hood = Neighborhood::TwoOpt;
    let mut idle_scans = 0;
    while idle_scans < 2 {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            stats.timed_out = true;
            break;
        }
        stats.scans += 1;
        match best_move(obj, tour, hood) {
            Some((m, _)) => {
                apply_move_in_place(tour, m);
                stats.moves += 1;
                idle_scans = 0;
                on_accept(tour, m);
            }
            None => idle_scans += 1,
        }
        hood = hood.other();
    }
    stats
}

/// Local search from `t0` until no 2-opt or relocate move improves `obj`.
pub fn local_search<O: Objective + ?Sized>(obj: &O, t0: &Tour, deadline: Option<Instant>) -> Tour {
    let mut t = t0.clone();
    local_search_with(obj, &mut t, deadline, |_, _| {});
    t
}

/// Whether any single 2-opt or relocate move strictly improves `obj`.
pub fn is_local_optimum<O: Objective + ?Sized>(obj: &O, t: &Tour) -> bool {
    best_two_opt(obj, t).is_none() && best_relocate(obj, t).is_none()
}

/// Result of a restricted search on one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedOutcome {
    pub tour: Tour,
    /// False when the edge was not in the input tour (the search is a no-op).
    pub edge_present: bool,
    pub applied: Option<(Move, f64)>,
}

/// Every non-identity move after which the tour no longer contains `(u, v)`:
/// 2-opt moves cutting `(u, v)`, relocations of `u` or `v` that do not land
/// next to the other endpoint, and relocations of any other node into the
/// `(u, v)` slot.
pub fn moves_removing_edge(t: &Tour, u: usize, v: usize) -> Vec<Move> {
    let n = t.len();
    if !t.has_edge(u, v) {
        return Vec::new();
    }
    let cut = if t.next(u) == v { t.position(u) } else { t.position(v) };
    let mut moves = Vec::with_capacity(4 * n);
    for k in 0..n {
        let (a, b) = if k < cut { (k, cut) } else { (cut, k) };
        let m = Move::TwoOpt { a, b };
        if !m.is_identity(n) {
            moves.push(m);
        }
    }
    for (node, other) in [(u, v), (v, u)] {
        let from = t.position(node);
        for to in 0..n - 1 {
            let m = Move::Relocate { from, to };
            if m.is_identity(n) {
                continue;
            }
            let (x, y) = insertion_slot(t, from, to);
            if x != other && y != other {
                moves.push(m);
            }
        }
    }
    let after_cut = (cut + 1) % n;
    for from in 0..n {
        let w = t.node_at(from);
        if w == u || w == v {
            continue;
        }
        let to = if after_cut < from { after_cut } else { after_cut - 1 };
        moves.push(Move::Relocate { from, to });
    }
    moves
}

/// Applies the best move removing edge `(u, v)` if it strictly improves `obj`.
pub fn restricted_local_search<O: Objective + ?Sized>(
    obj: &O,
    t: &Tour,
    edge: (usize, usize),
) -> RestrictedOutcome {
    let (u, v) = edge;
    if !t.has_edge(u, v) {
        return RestrictedOutcome {
            tour: t.clone(),
            edge_present: false,
            applied: None,
        };
    }
    let mut best = None;
    for m in moves_removing_edge(t, u, v) {
        consider(&mut best, m, m.delta(obj, t));
    }
    let mut tour = t.clone();
    if let Some((m, _)) = best {
        apply_move_in_place(&mut tour, m);
    }
    RestrictedOutcome {
        tour,
        edge_present: true,
        applied: best,
    }
}
