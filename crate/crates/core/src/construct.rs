//! Constructive heuristics. All ties are broken deterministically towards
//! lower node ids (and, for insertion, the earliest tour position).

use crate::instance::DistanceMatrix;
use crate::regret::RegretMatrix;
use crate::tour::Tour;

/// Greedy nearest neighbor tour from `start`.
pub fn nearest_neighbor(dm: &DistanceMatrix, start: usize) -> Tour {
    greedy_by_key(dm.n(), start, |from, to| (dm.get(from, to), 0.0))
}

/// Nearest-neighbor scheme keyed on regret: from the current node, follow
/// the lowest-regret edge to an unvisited node, breaking ties by edge weight
/// and then node id.
pub fn regret_greedy(dm: &DistanceMatrix, regret: &RegretMatrix, start: usize) -> Tour {
    assert_eq!(dm.n(), regret.n(), "regret matrix does not match the instance");
    greedy_by_key(dm.n(), start, |from, to| (regret.get(from, to), dm.get(from, to)))
}

fn greedy_by_key<K>(n: usize, start: usize, key: K) -> Tour
where
    K: Fn(usize, usize) -> (f64, f64),
{
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut best: Option<(usize, (f64, f64))> = None;
        for cand in 0..n {
            if visited[cand] {
                continue;
            }
            let k = key(cur, cand);
            // strict comparison keeps the lowest id on ties
            if best.is_none_or(|(_, bk)| k.0 < bk.0 || (k.0 == bk.0 && k.1 < bk.1)) {
                best = Some((cand, k));
            }
        }
        let (next, _) = best.expect("unvisited node remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    Tour::new(order).expect("greedy construction visits every node once")
}

#[derive(Clone, Copy)]
enum Selection {
    Farthest,
    Nearest,
}

/// Farthest insertion seeded with the farthest pair of nodes.
pub fn farthest_insertion(dm: &DistanceMatrix) -> Tour {
    let n = dm.n();
    let mut seed = (0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if dm.get(i, j) > dm.get(seed.0, seed.1) {
                seed = (i, j);
            }
        }
    }
    insertion(dm, vec![seed.0, seed.1], Selection::Farthest)
}

/// Nearest insertion seeded with `start` and its nearest neighbor.
pub fn nearest_insertion(dm: &DistanceMatrix, start: usize) -> Tour {
    let n = dm.n();
    let nearest = (0..n)
        .filter(|&v| v != start)
        .fold(None::<usize>, |best, v| match best {
            Some(b) if dm.get(start, b) <= dm.get(start, v) => Some(b),
            _ => Some(v),
        })
        .expect("n >= 3");
    insertion(dm, vec![start, nearest], Selection::Nearest)
}

fn insertion(dm: &DistanceMatrix, mut tour: Vec<usize>, selection: Selection) -> Tour {
    let n = dm.n();
    let mut in_tour = vec![false; n];
    // distance from each node to the partial tour
    let mut to_tour = vec![f64::INFINITY; n];
    for &v in &tour {
        in_tour[v] = true;
    }
    for v in 0..n {
        for &t in &tour {
            to_tour[v] = to_tour[v].min(dm.get(v, t));
        }
    }
    while tour.len() < n {
        let mut pick: Option<usize> = None;
        for v in (0..n).filter(|&v| !in_tour[v]) {
            let better = match (pick, selection) {
                (None, _) => true,
                (Some(p), Selection::Farthest) => to_tour[v] > to_tour[p],
                (Some(p), Selection::Nearest) => to_tour[v] < to_tour[p],
            };
            if better {
                pick = Some(v);
            }
        }
        let v = pick.expect("node outside tour");
        let len = tour.len();
        let mut best_slot = 0;
        let mut best_cost = f64::INFINITY;
        for p in 0..len {
            let (a, b) = (tour[p], tour[(p + 1) % len]);
            let c = dm.get(a, v) + dm.get(v, b) - dm.get(a, b);
            if c < best_cost {
                best_cost = c;
                best_slot = p;
            }
        }
        tour.insert(best_slot + 1, v);
        in_tour[v] = true;
        for u in 0..n {
            to_tour[u] = to_tour[u].min(dm.get(u, v));
        }
    }
    Tour::new(tour).expect("insertion visits every node once")
}
