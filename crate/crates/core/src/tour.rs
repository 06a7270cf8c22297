//! Tours, their cost, and the two move operators (2-opt and relocate) with
//! O(1) cost deltas.
//!
//! A tour keeps both the visiting order and its inverse (node -> position) so
//! that neighborhood scans can locate nodes and edges in constant time.
//!
//! Tour file line: `<name> cost=<cost> <id> <id> ...` with 0-based node ids.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;
use crate::search::Objective;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl Tour {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n < 3 {
            return Err(Error::InvalidTour(format!("tour needs at least 3 nodes, got {n}")));
        }
        let mut pos = vec![usize::MAX; n];
        for (p, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidTour(format!("node {v} out of range for n = {n}")));
            }
            if pos[v] != usize::MAX {
                return Err(Error::InvalidTour(format!("node {v} visited twice")));
            }
            pos[v] = p;
        }
        Ok(Tour { order, pos })
    }

    /// Checks the tour against an instance size.
    pub fn for_size(order: Vec<usize>, n: usize) -> Result<Self> {
        if order.len() != n {
            return Err(Error::InvalidTour(format!(
                "tour has {} nodes, instance has {n}",
                order.len()
            )));
        }
        Tour::new(order)
    }

    pub fn identity(n: usize) -> Self {
        Tour::new((0..n).collect()).expect("identity permutation")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    #[inline]
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    #[inline]
    pub fn node_at(&self, p: usize) -> usize {
        self.order[p]
    }

    #[inline]
    pub fn position(&self, node: usize) -> usize {
        self.pos[node]
    }

    #[inline]
    pub fn next(&self, node: usize) -> usize {
        let n = self.len();
        self.order[(self.pos[node] + 1) % n]
    }

    #[inline]
    pub fn prev(&self, node: usize) -> usize {
        let n = self.len();
        self.order[(self.pos[node] + n - 1) % n]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u < self.len() && v < self.len() && (self.next(u) == v || self.prev(u) == v)
    }

    /// Undirected edges as `(min, max)` pairs, in tour order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .map(|p| ordered(self.order[p], self.order[(p + 1) % n]))
            .collect()
    }

    /// Rotation starting at node 0, oriented so that the second node is
    /// smaller than the last one.
    pub fn canonical(&self) -> Tour {
        let n = self.len();
        let start = self.pos[0];
        let fwd = self.order[(start + 1) % n];
        let bwd = self.order[(start + n - 1) % n];
        let order: Vec<usize> = if fwd <= bwd {
            (0..n).map(|k| self.order[(start + k) % n]).collect()
        } else {
            (0..n).map(|k| self.order[(start + n - k) % n]).collect()
        };
        Tour::new(order).expect("rotation of a valid tour")
    }

    /// Same cycle, possibly rotated or reversed.
    pub fn same_cycle(&self, other: &Tour) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }

    fn rebuild_positions(&mut self, from: usize, to: usize) {
        for p in from..=to {
            self.pos[self.order[p]] = p;
        }
    }
}

#[inline]
pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The set of undirected edges of a tour.
pub fn edges_of(t: &Tour) -> BTreeSet<(usize, usize)> {
    t.edges().into_iter().collect()
}

/// Cost of the closed tour, summed edge by edge along its canonical
/// traversal (see [`Tour::canonical`]), so every rotation and reflection of
/// a cycle gets bit-identical cost.
pub fn tour_cost(dm: &DistanceMatrix, t: &Tour) -> f64 {
    objective_value(dm, t)
}

pub(crate) fn objective_value<O: Objective + ?Sized>(obj: &O, t: &Tour) -> f64 {
    let order = t.order();
    let n = order.len();
    let start = t.position(0);
    let forward = order[(start + 1) % n] <= order[(start + n - 1) % n];
    let at = |k: usize| {
        if forward {
            order[(start + k) % n]
        } else {
            order[(start + n - k) % n]
        }
    };
    let mut total = 0.0;
    for k in 0..n - 1 {
        total += obj.edge_cost(at(k), at(k + 1));
    }
    total + obj.edge_cost(at(n - 1), at(0))
}

/// Validates a raw order against `dm` and returns its cost.
pub fn order_cost(dm: &DistanceMatrix, order: &[usize]) -> Result<f64> {
    let t = Tour::for_size(order.to_vec(), dm.n())?;
    Ok(tour_cost(dm, &t))
}

/// A neighborhood move, addressed by tour positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Cut after positions `a` and `b` (`a < b`) and reverse `a+1..=b`.
    TwoOpt { a: usize, b: usize },
    /// Take the node at `from` out and reinsert it so it ends up at index
    /// `to` of the new order.
    Relocate { from: usize, to: usize },
}

impl Move {
    pub fn delta<O: Objective + ?Sized>(&self, obj: &O, t: &Tour) -> f64 {
        match *self {
            Move::TwoOpt { a, b } => delta_two_opt(obj, t, a, b),
            Move::Relocate { from, to } => delta_relocate(obj, t, from, to),
        }
    }

    /// Whether applying the move leaves the cycle unchanged.
    pub fn is_identity(&self, n: usize) -> bool {
        match *self {
            Move::TwoOpt { a, b } => {
                let (a, b) = ordered(a, b);
                b <= a + 1 || (a == 0 && b == n - 1)
            }
            Move::Relocate { from, to } => to % (n - 1) == from % (n - 1),
        }
    }

    /// Tour edges removed by the move (empty for identity moves).
    pub fn removed_edges(&self, t: &Tour) -> Vec<(usize, usize)> {
        let n = t.len();
        if self.is_identity(n) {
            return Vec::new();
        }
        match *self {
            Move::TwoOpt { a, b } => {
                let (a, b) = ordered(a, b);
                vec![
                    ordered(t.node_at(a), t.node_at(a + 1)),
                    ordered(t.node_at(b), t.node_at((b + 1) % n)),
                ]
            }
            Move::Relocate { from, .. } => {
                let v = t.node_at(from);
                vec![ordered(t.prev(v), v), ordered(v, t.next(v))]
            }
        }
    }
}

/// Cost change of the 2-opt move cutting after positions `a` and `b`.
pub fn delta_two_opt<O: Objective + ?Sized>(obj: &O, t: &Tour, a: usize, b: usize) -> f64 {
    let n = t.len();
    let (a, b) = ordered(a, b);
    if b <= a + 1 || (a == 0 && b == n - 1) {
        return 0.0;
    }
    let (x1, x2) = (t.node_at(a), t.node_at(a + 1));
    let (y1, y2) = (t.node_at(b), t.node_at((b + 1) % n));
    (obj.edge_cost(x1, y1) + obj.edge_cost(x2, y2)) - (obj.edge_cost(x1, x2) + obj.edge_cost(y1, y2))
}

/// Neighbours `(x, y)` between which the node at `from` lands when inserted
/// at index `to` of the shortened order.
#[inline]
pub(crate) fn insertion_slot(t: &Tour, from: usize, to: usize) -> (usize, usize) {
    let m = t.len() - 1;
    let reduced = |k: usize| if k < from { t.node_at(k) } else { t.node_at(k + 1) };
    (reduced((to + m - 1) % m), reduced(to % m))
}

/// Cost change of relocating the node at position `from` to index `to`.
pub fn delta_relocate<O: Objective + ?Sized>(obj: &O, t: &Tour, from: usize, to: usize) -> f64 {
    let n = t.len();
    let m = n - 1;
    if to % m == from % m {
        return 0.0;
    }
    let v = t.node_at(from);
    let (p, q) = (t.prev(v), t.next(v));
    let (x, y) = insertion_slot(t, from, to);
    let removal = obj.edge_cost(p, v) + obj.edge_cost(v, q) - obj.edge_cost(p, q);
    let insertion = obj.edge_cost(x, v) + obj.edge_cost(v, y) - obj.edge_cost(x, y);
    insertion - removal
}

/// Applies `m` in place.
pub fn apply_move_in_place(t: &mut Tour, m: Move) {
    let n = t.len();
    match m {
        Move::TwoOpt { a, b } => {
            let (a, b) = ordered(a, b);
            if b <= a {
                return;
            }
            t.order[a + 1..=b].reverse();
            t.rebuild_positions(a + 1, b);
        }
        Move::Relocate { from, to } => {
            let to = to.min(n - 1);
            if from == to {
                return;
            }
            let v = t.order.remove(from);
            t.order.insert(to, v);
            let (lo, hi) = ordered(from, to);
            t.rebuild_positions(lo, hi);
        }
    }
}

pub fn apply_move(t: &Tour, m: Move) -> Tour {
    let mut out = t.clone();
    apply_move_in_place(&mut out, m);
    out
}

pub fn format_tour_line(name: &str, cost: f64, t: &Tour) -> String {
    let mut line = format!("{name} cost={cost:?}");
    for v in t.order() {
        let _ = write!(line, " {v}");
    }
    line
}

/// Parses a tour file line into `(name, cost, tour)`.
pub fn parse_tour_line(line: &str) -> Result<(String, f64, Tour)> {
    let mut it = line.split_whitespace();
    let name = it
        .next()
        .ok_or_else(|| Error::parse(1, "empty tour line"))?
        .to_string();
    let cost_tok = it.next().unwrap_or("");
    let cost = cost_tok
        .strip_prefix("cost=")
        .and_then(|c| c.parse::<f64>().ok())
        .ok_or_else(|| Error::parse(1, format!("expected `cost=<value>`, got `{cost_tok}`")))?;
    let order = it
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(1, format!("bad node id `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name, cost, Tour::new(order)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> DistanceMatrix {
        Instance::from_xy("sq", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
            .unwrap()
            .distance_matrix()
    }

    #[test]
    fn perimeter_cost() {
        assert_eq!(tour_cost(&square(), &Tour::identity(4)), 4.0);
    }

    #[test]
    fn validation_errors() {
        assert!(Tour::new(vec![0, 1, 1]).is_err());
        assert!(Tour::new(vec![0, 1, 5]).is_err());
        assert!(Tour::for_size(vec![0, 1, 2], 4).is_err());
        assert!(order_cost(&square(), &[0, 2, 2, 1]).is_err());
    }

    #[test]
    fn cost_invariant_under_rotation_and_reversal() {
        let dm = Instance::random(12, 5).unwrap().distance_matrix();
        let t = Tour::new(vec![3, 0, 7, 1, 9, 2, 11, 4, 6, 5, 10, 8]).unwrap();
        let mut rev = t.order().to_vec();
        rev.reverse();
        let mut rot = t.order().to_vec();
        rot.rotate_left(5);
        let c = tour_cost(&dm, &t);
        assert!((tour_cost(&dm, &Tour::new(rev).unwrap()) - c).abs() < 1e-12);
        assert!((tour_cost(&dm, &Tour::new(rot).unwrap()) - c).abs() < 1e-12);
    }

    #[test]
    fn crossed_square_two_opt() {
        let dm = square();
        // 0 -> 2 -> 1 -> 3 crosses itself
        let t = Tour::new(vec![0, 2, 1, 3]).unwrap();
        let before = tour_cost(&dm, &t);
        let d = delta_two_opt(&dm, &t, 0, 2);
        let after = tour_cost(&dm, &apply_move(&t, Move::TwoOpt { a: 0, b: 2 }));
        assert!((d - (after - before)).abs() < 1e-12);
        assert!((d - (2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(after, 4.0);
    }

    #[test]
    fn identity_moves_have_zero_delta() {
        let dm = Instance::random(10, 1).unwrap().distance_matrix();
        let t = Tour::identity(10);
        assert_eq!(delta_two_opt(&dm, &t, 3, 3), 0.0);
        assert_eq!(delta_two_opt(&dm, &t, 3, 4), 0.0);
        assert_eq!(delta_two_opt(&dm, &t, 0, 9), 0.0);
        for p in 0..10 {
            assert_eq!(delta_relocate(&dm, &t, p, p), 0.0);
        }
        assert_eq!(delta_relocate(&dm, &t, 9, 0), 0.0);
        assert_eq!(apply_move(&t, Move::Relocate { from: 4, to: 4 }), t);
        assert_eq!(apply_move(&t, Move::TwoOpt { a: 2, b: 2 }), t);
    }

    #[test]
    fn relocate_interior_node_of_path_like_tour() {
        // points on a line: 0 at x=0, 1 at x=3, 2 at x=1, 3 at x=2
        let dm = Instance::from_xy("line", &[(0.0, 0.0), (3.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
            .unwrap()
            .distance_matrix();
        let t = Tour::new(vec![0, 1, 2, 3]).unwrap();
        // move node 1 (position 1) to the end: 0 2 3 1
        let m = Move::Relocate { from: 1, to: 3 };
        let moved = apply_move(&t, m);
        assert_eq!(moved.order(), &[0, 2, 3, 1]);
        let d = delta_relocate(&dm, &t, 1, 3);
        assert!((d - (tour_cost(&dm, &moved) - tour_cost(&dm, &t))).abs() < 1e-12);
        assert_eq!(tour_cost(&dm, &moved), 6.0);
    }

    #[test]
    fn random_deltas_match_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..40 {
            let n = rng.gen_range(3..30);
            let dm = Instance::random(n, trial).unwrap().distance_matrix();
            let mut t = Tour::identity(n);
            for _ in 0..50 {
                let m = if rng.gen_bool(0.5) {
                    Move::TwoOpt {
                        a: rng.gen_range(0..n),
                        b: rng.gen_range(0..n),
                    }
                } else {
                    Move::Relocate {
                        from: rng.gen_range(0..n),
                        to: rng.gen_range(0..n),
                    }
                };
                let before = tour_cost(&dm, &t);
                let d = m.delta(&dm, &t);
                apply_move_in_place(&mut t, m);
                let after = tour_cost(&dm, &t);
                assert!(
                    ((after - before) - d).abs() <= 1e-9 * before.max(1.0),
                    "{m:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn two_opt_is_an_involution() {
        let t = Tour::new(vec![4, 2, 0, 6, 1, 5, 3]).unwrap();
        let m = Move::TwoOpt { a: 1, b: 5 };
        assert_eq!(apply_move(&apply_move(&t, m), m), t);
    }

    #[test]
    fn edges_of_tour() {
        let tri = Tour::new(vec![2, 0, 1]).unwrap();
        let e = edges_of(&tri);
        assert_eq!(e, [(0, 1), (0, 2), (1, 2)].into_iter().collect());

        let t = Tour::new(vec![5, 3, 0, 1, 4, 2]).unwrap();
        let e = edges_of(&t);
        assert_eq!(e.len(), 6);
        let mut rev = t.order().to_vec();
        rev.reverse();
        rev.rotate_left(2);
        assert_eq!(edges_of(&Tour::new(rev).unwrap()), e);
        let mut degree = [0; 6];
        for (a, b) in e {
            degree[a] += 1;
            degree[b] += 1;
        }
        assert!(degree.iter().all(|&d| d == 2));
    }

    #[test]
    fn removed_edges_are_gone_after_move() {
        let t = Tour::new(vec![0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        for m in [Move::TwoOpt { a: 1, b: 5 }, Move::Relocate { from: 3, to: 6 }] {
            let after = apply_move(&t, m);
            for (u, v) in m.removed_edges(&t) {
                assert!(!after.has_edge(u, v), "{m:?} kept ({u},{v})");
            }
        }
    }

    #[test]
    fn canonical_form() {
        let t = Tour::new(vec![3, 1, 0, 2, 4]).unwrap();
        assert_eq!(t.canonical().order(), &[0, 1, 3, 4, 2]);
        assert!(t.same_cycle(&t.canonical()));
    }

    #[test]
    fn tour_line_roundtrip() {
        let t = Tour::new(vec![2, 0, 3, 1]).unwrap();
        let line = format_tour_line("x", 3.25, &t);
        assert_eq!(line, "x cost=3.25 2 0 3 1");
        let (name, cost, back) = parse_tour_line(&line).unwrap();
        assert_eq!((name.as_str(), cost), ("x", 3.25));
        assert_eq!(back, t);
    }
}
