//! Engineered per-edge features.
//!
//! Node 0 plays the role of the depot. Edge-level channels are reported for
//! every undirected edge `(i, j)`, `i < j`, in lexicographic order.

use std::str::FromStr;

use crate::construct::{nearest_insertion, nearest_neighbor};
use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance, DEPOT};
use crate::tour::Tour;

/// Perpendicular distance from every node to the line through the depot and
/// the centroid. All zero when the centroid coincides with the depot.
pub fn node_widths(inst: &Instance) -> Vec<f64> {
    let n = inst.n() as f64;
    let depot = inst.coords[DEPOT];
    let (cx, cy) = inst
        .coords
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (dx, dy) = (cx / n - depot.x, cy / n - depot.y);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return vec![0.0; inst.n()];
    }
    inst.coords
        .iter()
        .map(|p| (dx * (p.y - depot.y) - dy * (p.x - depot.x)).abs() / len)
        .collect()
}

pub fn node_width(inst: &Instance, v: usize) -> f64 {
    node_widths(inst)[v]
}

pub fn edge_width(widths: &[f64], i: usize, j: usize) -> f64 {
    (widths[i] - widths[j]).abs()
}

/// `k` such that `j` is the k-th nearest neighbor of `i` (ties by node id).
pub fn neighbor_rank(dm: &DistanceMatrix, i: usize, j: usize) -> usize {
    let wij = dm.get(i, j);
    1 + (0..dm.n())
        .filter(|&k| k != i && k != j)
        .filter(|&k| {
            let w = dm.get(i, k);
            w < wij || (w == wij && k < j)
        })
        .count()
}

/// All ranks: `ranks[i][j]` is [`neighbor_rank`]`(i, j)`, 0 on the diagonal.
pub fn neighbor_ranks(dm: &DistanceMatrix) -> Vec<Vec<usize>> {
    let n = dm.n();
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dm.get(i, a).total_cmp(&dm.get(i, b)).then(a.cmp(&b)));
            let mut row = vec![0; n];
            for (r, &j) in others.iter().enumerate() {
                row[j] = r + 1;
            }
            row
        })
        .collect()
}

/// Neighborhood size for a k-NN graph covering `percent`% of the nodes:
/// `max(1, round_half_up(percent * n / 100))`, capped at `n - 1`.
pub fn knn_k(n: usize, percent: usize) -> usize {
    ((percent * n + 50) / 100).max(1).min(n - 1)
}

/// Membership of every edge in the (undirected) k-NN graph with
/// `k = knn_k(n, round(fraction * 100))`, as an `n x n` boolean matrix.
pub fn knn_membership(dm: &DistanceMatrix, fraction: f64) -> Vec<Vec<bool>> {
    let n = dm.n();
    let k = knn_k(n, (fraction * 100.0).round() as usize);
    let ranks = neighbor_ranks(dm);
    let mut member = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && (ranks[i][j] <= k || ranks[j][i] <= k) {
                member[i][j] = true;
            }
        }
    }
    member
}

#[inline]
fn edge_id(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n + b
}

/// Edges of the minimum spanning tree found by Prim's algorithm from node
/// 0. Ties go to the lower edge id.
pub fn mst_edges(dm: &DistanceMatrix) -> Vec<(usize, usize)> {
    let n = dm.n();
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    in_tree[0] = true;
    for v in 1..n {
        key[v] = dm.get(0, v);
        parent[v] = 0;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            if pick == usize::MAX
                || key[v] < key[pick]
                || (key[v] == key[pick] && edge_id(n, parent[v], v) < edge_id(n, parent[pick], pick))
            {
                pick = v;
            }
        }
        in_tree[pick] = true;
        let p = parent[pick];
        edges.push(if p < pick { (p, pick) } else { (pick, p) });
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = dm.get(pick, v);
            if w < key[v] || (w == key[v] && edge_id(n, pick, v) < edge_id(n, parent[v], v)) {
                key[v] = w;
                parent[v] = pick;
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Tours whose edges feed the `nn_sol` and `ni_sol` channels.
pub fn heuristic_tours(dm: &DistanceMatrix) -> (Tour, Tour) {
    (nearest_neighbor(dm, 0), nearest_insertion(dm, 0))
}

/// Named feature channels. `_i`/`_j` refer to the lower/higher endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Weight,
    NodeWidthI,
    NodeWidthJ,
    EdgeWidth,
    DepotWeightI,
    DepotWeightJ,
    NeighborRankIJ,
    NeighborRankJI,
    Knn30,
    Knn20,
    Knn10,
    Mst,
    NnSol,
    NiSol,
}

impl Channel {
    pub const ALL: [Channel; 14] = [
        Channel::Weight,
        Channel::NodeWidthI,
        Channel::NodeWidthJ,
        Channel::EdgeWidth,
        Channel::DepotWeightI,
        Channel::DepotWeightJ,
        Channel::NeighborRankIJ,
        Channel::NeighborRankJI,
        Channel::Knn30,
        Channel::Knn20,
        Channel::Knn10,
        Channel::Mst,
        Channel::NnSol,
        Channel::NiSol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Weight => "weight",
            Channel::NodeWidthI => "node_width_i",
            Channel::NodeWidthJ => "node_width_j",
            Channel::EdgeWidth => "edge_width",
            Channel::DepotWeightI => "depot_weight_i",
            Channel::DepotWeightJ => "depot_weight_j",
            Channel::NeighborRankIJ => "neighbor_rank_ij",
            Channel::NeighborRankJI => "neighbor_rank_ji",
            Channel::Knn30 => "knn30",
            Channel::Knn20 => "knn20",
            Channel::Knn10 => "knn10",
            Channel::Mst => "mst",
            Channel::NnSol => "nn_sol",
            Channel::NiSol => "ni_sol",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            Channel::Knn30 | Channel::Knn20 | Channel::Knn10 | Channel::Mst | Channel::NnSol | Channel::NiSol
        )
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature channel `{s}`")))
    }
}

/// Parses a comma-separated channel list; `all` selects every channel.
pub fn parse_channels(list: &str) -> Result<Vec<Channel>> {
    if list.trim() == "all" {
        return Ok(Channel::ALL.to_vec());
    }
    let mut out: Vec<Channel> = list
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty feature selection".into()));
    }
    Ok(out)
}

/// Per-edge feature vectors for the selected channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFeatureSet {
    pub n: usize,
    /// Edges `(i, j)`, `i < j`, in lexicographic order.
    pub edges: Vec<(usize, usize)>,
    pub channels: Vec<Channel>,
    /// `values[c][e]` is channel `channels[c]` of edge `edges[e]`.
    pub values: Vec<Vec<f64>>,
}

impl EdgeFeatureSet {
    pub fn channel(&self, c: Channel) -> Option<&[f64]> {
        self.channels
            .iter()
            .position(|&x| x == c)
            .map(|k| self.values[k].as_slice())
    }
}

pub fn lexicographic_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn edge_features(inst: &Instance, channels: &[Channel]) -> EdgeFeatureSet {
    let n = inst.n();
    let dm = inst.distance_matrix();
    let edges = lexicographic_edges(n);
    let needs = |cs: &[Channel]| channels.iter().any(|c| cs.contains(c));

    let widths = needs(&[Channel::NodeWidthI, Channel::NodeWidthJ, Channel::EdgeWidth])
        .then(|| node_widths(inst));
    let ranks = needs(&[Channel::NeighborRankIJ, Channel::NeighborRankJI]).then(|| neighbor_ranks(&dm));
    let knn = |c: Channel, f: f64| needs(&[c]).then(|| knn_membership(&dm, f));
    let (knn30, knn20, knn10) = (knn(Channel::Knn30, 0.3), knn(Channel::Knn20, 0.2), knn(Channel::Knn10, 0.1));
    let mst = needs(&[Channel::Mst]).then(|| {
        let mut m = vec![vec![false; n]; n];
        for (a, b) in mst_edges(&dm) {
            m[a][b] = true;
        }
        m
    });
    let nn = needs(&[Channel::NnSol]).then(|| nearest_neighbor(&dm, 0));
    let ni = needs(&[Channel::NiSol]).then(|| nearest_insertion(&dm, 0));
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    let values = channels
        .iter()
        .map(|&c| {
            edges
                .iter()
                .map(|&(i, j)| match c {
                    Channel::Weight => dm.get(i, j),
                    Channel::NodeWidthI => widths.as_ref().unwrap()[i],
                    Channel::NodeWidthJ => widths.as_ref().unwrap()[j],
                    Channel::EdgeWidth => edge_width(widths.as_ref().unwrap(), i, j),
                    Channel::DepotWeightI => dm.get(i, DEPOT),
                    Channel::DepotWeightJ => dm.get(j, DEPOT),
                    Channel::NeighborRankIJ => ranks.as_ref().unwrap()[i][j] as f64,
                    Channel::NeighborRankJI => ranks.as_ref().unwrap()[j][i] as f64,
                    Channel::Knn30 => flag(knn30.as_ref().unwrap()[i][j]),
                    Channel::Knn20 => flag(knn20.as_ref().unwrap()[i][j]),
                    Channel::Knn10 => flag(knn10.as_ref().unwrap()[i][j]),
                    Channel::Mst => flag(mst.as_ref().unwrap()[i][j]),
                    Channel::NnSol => flag(nn.as_ref().unwrap().has_edge(i, j)),
                    Channel::NiSol => flag(ni.as_ref().unwrap().has_edge(i, j)),
                })
                .collect()
        })
        .collect();
    EdgeFeatureSet {
        n,
        edges,
        channels: channels.to_vec(),
        values,
    }
}
