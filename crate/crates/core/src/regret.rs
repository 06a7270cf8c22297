//! Exact TSP solvers and the global-regret oracle.
//!
//! The regret of edge `(i, j)` is the relative extra cost of the best tour
//! forced through that edge: `r_ij = g(s*_ij) / g(s*) - 1`.
//!
//! Everything here is exact and exponential. [`held_karp`] runs the subset
//! dynamic program over paths leaving one start node; the table it builds
//! holds `O(2^(n-1) * (n-1))` doubles, about 80 MB at the supported maximum of
//! `n = 20`.
//!
//! Regret file (CSV):
//!
//! ```text
//! # provenance=oracle        <- optional, absent means "predicted"
//! i,j,regret
//! 0,1,0.0
//! 0,2,0.1234
//! ...
//! ```
//!
//! One row per unordered pair. `n` is inferred from the largest index.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;
use crate::tour::{tour_cost, Tour};

pub const BRUTE_FORCE_MAX_N: usize = 10;
pub const HELD_KARP_MAX_N: usize = 20;

/// Fixed-edge optima within this relative distance of the optimum are
/// treated as optimal (regret exactly zero).
pub const ZERO_REGRET_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Oracle,
    Predicted,
}

/// Symmetric per-edge regret values with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretMatrix {
    n: usize,
    values: Vec<f64>,
    provenance: Provenance,
}

impl RegretMatrix {
    /// Builds a matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, provenance: Provenance, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let r = f(i, j);
                values[i * n + j] = r;
                values[j * n + i] = r;
            }
        }
        RegretMatrix { n, values, provenance }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Largest off-diagonal value.
    pub fn max_value(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.max(self.get(i, j));
            }
        }
        m
    }

    /// Copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        RegretMatrix {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            provenance: self.provenance,
        }
    }
}

// ---------------------------------------------------------------------------
// Exact solvers
// ---------------------------------------------------------------------------

/// Optimal tour by exhaustive enumeration of the `(n-1)!/2` distinct cycles.
///
/// Cycles are visited in lexicographic order of their canonical form (node 0
/// first, second node smaller than the last) and the first strict minimum is
/// kept.
pub fn brute_force(dm: &DistanceMatrix) -> Result<(Tour, f64)> {
    let n = dm.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Capacity {
            solver: "brute-force",
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_cycle(n, |order| {
        let c = cycle_cost(dm, order);
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((order.to_vec(), c));
        }
    });
    let (order, _) = best.expect("at least one cycle");
    let tour = Tour::new(order)?;
    let cost = tour_cost(dm, &tour);
    Ok((tour, cost))
}

/// Calls `visit` with every distinct cycle in canonical form, in
/// lexicographic order.
pub fn for_each_cycle(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        if order[1] < order[n - 1] {
            visit(&order);
        }
        if !next_permutation(&mut order[1..]) {
            break;
        }
    }
}

fn next_permutation(xs: &mut [usize]) -> bool {
    let len = xs.len();
    if len < 2 {
        return false;
    }
    let mut i = len - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = len - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

fn cycle_cost(dm: &DistanceMatrix, order: &[usize]) -> f64 {
    let n = order.len();
    let mut total = 0.0;
    for p in 0..n - 1 {
        total += dm.get(order[p], order[p + 1]);
    }
    total + dm.get(order[n - 1], order[0])
}

/// Held-Karp table of shortest Hamiltonian paths leaving `start`.
///
/// `value(mask, e)` is the cheapest path that starts at `start`, visits
/// exactly the nodes in `mask` (bit `b` stands for node `others[b]`) and
/// ends at the node of bit `e`.
pub struct PathTable {
    start: usize,
    others: Vec<usize>,
    dp: Vec<f64>,
}

impl PathTable {
    pub fn build(dm: &DistanceMatrix, start: usize) -> Result<Self> {
        let n = dm.n();
        if n > HELD_KARP_MAX_N {
            return Err(Error::Capacity {
                solver: "Held-Karp",
                n,
                max: HELD_KARP_MAX_N,
            });
        }
        let others: Vec<usize> = (0..n).filter(|&v| v != start).collect();
        let m = others.len();
        let w: Vec<Vec<f64>> = others
            .iter()
            .map(|&a| others.iter().map(|&b| dm.get(a, b)).collect())
            .collect();
        let full = (1usize << m) - 1;
        let mut dp = vec![f64::INFINITY; (full + 1) * m];
        for (b, &v) in others.iter().enumerate() {
            dp[(1 << b) * m + b] = dm.get(start, v);
        }
        for mask in 1..=full {
            let base = mask * m;
            for e in 0..m {
                if mask & (1 << e) == 0 {
                    continue;
                }
                let c = dp[base + e];
                if c == f64::INFINITY {
                    continue;
                }
                let row = &w[e];
                let mut rest = full & !mask;
                while rest != 0 {
                    let nxt = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let slot = (mask | (1 << nxt)) * m + nxt;
                    let cand = c + row[nxt];
                    if cand < dp[slot] {
                        dp[slot] = cand;
                    }
                }
            }
        }
        Ok(PathTable { start, others, dp })
    }

    #[inline]
    fn m(&self) -> usize {
        self.others.len()
    }

    pub fn full_mask(&self) -> usize {
        (1 << self.m()) - 1
    }

    /// Bit index of `node`, which must not be the start node.
    pub fn bit_of(&self, node: usize) -> usize {
        if node < self.start {
            node
        } else {
            node - 1
        }
    }

    #[inline]
    pub fn value(&self, mask: usize, end_bit: usize) -> f64 {
        self.dp[mask * self.m() + end_bit]
    }

    /// Node sequence of the optimal path for `(mask, end_bit)`, start first.
    pub fn path(&self, dm: &DistanceMatrix, mut mask: usize, mut end: usize) -> Vec<usize> {
        let mut rev = vec![self.others[end]];
        while mask != 1 << end {
            let target = self.value(mask, end);
            let prev_mask = mask & !(1 << end);
            let node = self.others[end];
            let pred = (0..self.m())
                .filter(|&p| prev_mask & (1 << p) != 0)
                .find(|&p| self.value(prev_mask, p) + dm.get(self.others[p], node) == target)
                .expect("predecessor reproduces the stored value");
            rev.push(self.others[pred]);
            mask = prev_mask;
            end = pred;
        }
        rev.push(self.start);
        rev.reverse();
        rev
    }
}

fn held_karp_from_table(dm: &DistanceMatrix, table: &PathTable) -> (Tour, f64) {
    let full = table.full_mask();
    let mut best_end = 0;
    let mut best = f64::INFINITY;
    for e in 0..table.m() {
        let c = table.value(full, e) + dm.get(table.others[e], table.start);
        if c < best {
            best = c;
            best_end = e;
        }
    }
    let tour = Tour::new(table.path(dm, full, best_end))
        .expect("Held-Karp path is a permutation")
        .canonical();
    (tour, best)
}

/// Optimal tour by the Held-Karp subset dynamic program (`n <= 20`).
///
/// The returned cost is the tour cost of the reconstructed tour, so it
/// compares exactly with costs computed anywhere else for the same tour.
pub fn held_karp(dm: &DistanceMatrix) -> Result<(Tour, f64)> {
    let table = PathTable::build(dm, 0)?;
    let (tour, _) = held_karp_from_table(dm, &table);
    let cost = tour_cost(dm, &tour);
    Ok((tour, cost))
}

/// Cheapest tour cost among tours that contain edge `(i, j)`: the edge weight
/// plus the shortest Hamiltonian path from `i` to `j` through every other node.
pub fn fixed_edge_optimum(dm: &DistanceMatrix, i: usize, j: usize) -> Result<f64> {
    let n = dm.n();
    for index in [i, j] {
        if index >= n {
            return Err(Error::NodeOutOfRange { index, n });
        }
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    let table = PathTable::build(dm, i)?;
    Ok(dm.get(i, j) + table.value(table.full_mask(), table.bit_of(j)))
}

/// Optimal tour, its cost and the full oracle regret matrix.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub tour: Tour,
    /// `tour_cost` of `tour`.
    pub cost: f64,
    pub regret: RegretMatrix,
}

/// Solves the instance exactly and derives every edge's regret from a
/// single Held-Karp table rooted at node 0.
///
/// A tour through `(i, j)` with `i, j != 0` splits into a path `0 -> i`
/// over some node set `A` and a path `j -> 0` over the complement, so its
/// best cost is a minimum over the `2^(n-3)` splits. Edges at node 0 read the
/// full-set entries directly.
pub fn oracle(dm: &DistanceMatrix) -> Result<OracleSolution> {
    let n = dm.n();
    let table = PathTable::build(dm, 0)?;
    let (tour, optimum) = held_karp_from_table(dm, &table);
    let full = table.full_mask();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let fixed: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if i == 0 {
                let bj = table.bit_of(j);
                return table.value(full, bj) + dm.get(j, 0);
            }
            let (bi, bj) = (table.bit_of(i), table.bit_of(j));
            let rest = full & !(1 << bi) & !(1 << bj);
            let w = dm.get(i, j);
            let mut best = f64::INFINITY;
            let mut sub = rest;
            loop {
                let left = sub | (1 << bi);
                let right = (rest & !sub) | (1 << bj);
                let c = table.value(left, bi) + w + table.value(right, bj);
                if c < best {
                    best = c;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best
        })
        .collect();

    let mut values = vec![0.0; n * n];
    for (&(i, j), &f) in pairs.iter().zip(&fixed) {
        let r = if f - optimum <= ZERO_REGRET_RTOL * optimum {
            0.0
        } else {
            f / optimum - 1.0
        };
        values[i * n + j] = r;
        values[j * n + i] = r;
    }
    let cost = tour_cost(dm, &tour);
    Ok(OracleSolution {
        tour,
        cost,
        regret: RegretMatrix {
            n,
            values,
            provenance: Provenance::Oracle,
        },
    })
}

/// Oracle regret matrix (see [`oracle`]).
pub fn regret_matrix(dm: &DistanceMatrix) -> Result<RegretMatrix> {
    Ok(oracle(dm)?.regret)
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

pub fn format_regret_csv(r: &RegretMatrix) -> String {
    let mut out = String::new();
    if r.provenance == Provenance::Oracle {
        out.push_str("# provenance=oracle\n");
    }
    out.push_str("i,j,regret\n");
    for i in 0..r.n {
        for j in i + 1..r.n {
            let _ = writeln!(out, "{i},{j},{:?}", r.get(i, j));
        }
    }
    out
}

pub fn save_regret(r: &RegretMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_regret_csv(r)).map_err(|e| Error::file(path, e))
}

/// A loaded regret matrix plus what the loader had to repair.
#[derive(Debug, Clone)]
pub struct LoadedRegret {
    pub matrix: RegretMatrix,
    /// Entries raised from a negative value to 0.
    pub clamped: usize,
    /// Pairs given in both directions with different values, replaced by their mean.
    pub symmetrized: usize,
}

pub fn parse_regret_csv(text: &str) -> Result<LoadedRegret> {
    let mut provenance = Provenance::Predicted;
    let mut rows: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim() == "provenance=oracle" {
                provenance = Provenance::Oracle;
            }
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "i,j,regret" {
                return Err(Error::RegretFormat {
                    line: line_no,
                    msg: format!("expected header `i,j,regret`, got `{line}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::RegretFormat {
                line: line_no,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::RegretFormat {
                line: line_no,
                msg: format!("non-numeric node index `{s}`"),
            })
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let value: f64 = fields[2].parse().map_err(|_| Error::RegretFormat {
            line: line_no,
            msg: format!("non-numeric regret `{}`", fields[2]),
        })?;
        if !value.is_finite() {
            return Err(Error::RegretFormat {
                line: line_no,
                msg: format!("non-finite regret `{}`", fields[2]),
            });
        }
        if i == j {
            return Err(Error::RegretFormat {
                line: line_no,
                msg: format!("self-loop ({i},{i})"),
            });
        }
        rows.push((i, j, value, line_no));
    }
    if !header_seen {
        return Err(Error::RegretFormat {
            line: 0,
            msg: "missing header `i,j,regret`".into(),
        });
    }
    let n = rows.iter().map(|&(i, j, _, _)| i.max(j)).max().map_or(0, |m| m + 1);
    if n < 3 {
        return Err(Error::RegretFormat {
            line: 0,
            msg: format!("need at least 3 nodes, found {n}"),
        });
    }

    let mut given: Vec<Option<f64>> = vec![None; n * n];
    for &(i, j, value, line_no) in &rows {
        if given[i * n + j].replace(value).is_some() {
            return Err(Error::RegretFormat {
                line: line_no,
                msg: format!("duplicate entry ({i},{j})"),
            });
        }
    }
    let mut clamped = 0;
    let mut symmetrized = 0;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = match (given[i * n + j], given[j * n + i]) {
                (Some(a), Some(b)) => {
                    if a != b {
                        symmetrized += 1;
                    }
                    (a + b) / 2.0
                }
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => {
                    return Err(Error::RegretFormat {
                        line: 0,
                        msg: format!("missing entry ({i},{j}) for n = {n}"),
                    })
                }
            };
            let v = if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v
            };
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} negative regret values to 0");
    }
    Ok(LoadedRegret {
        matrix: RegretMatrix {
            n,
            values,
            provenance,
        },
        clamped,
        symmetrized,
    })
}

pub fn load_regret(path: impl AsRef<Path>) -> Result<LoadedRegret> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_regret_csv(&text)
}

/// Loads a regret file and checks it against an instance of size `n`.
pub fn load_regret_for(path: impl AsRef<Path>, n: usize) -> Result<LoadedRegret> {
    let loaded = load_regret(path)?;
    if loaded.matrix.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: loaded.matrix.n,
        });
    }
    Ok(loaded)
}
