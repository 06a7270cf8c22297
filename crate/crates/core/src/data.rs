//! Line graphs and the training-dataset export consumed by the regret model.
//!
//! Dataset file: JSON Lines, one [`DatasetRecord`] per instance. Field names
//! are frozen; see the README for the full schema.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{edge_features, lexicographic_edges, Channel};
use crate::instance::Instance;
use crate::regret::{oracle, HELD_KARP_MAX_N};

/// Line graph of the complete graph on `n` nodes.
///
/// Node `k` stands for edge `edges[k]` of the original graph; arcs hold
/// both directions of every adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Directed arcs `(a, b)` between line-graph nodes, sorted.
    pub arcs: Vec<(usize, usize)>,
}

impl LineGraph {
    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    pub fn undirected_arc_count(&self) -> usize {
        self.arcs.len() / 2
    }

    /// Line-graph index of edge `(i, j)` of the original graph.
    pub fn node_of(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // rows 0..a contribute (n-1) + (n-2) + ... + (n-a) nodes
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }
}

pub fn line_graph(n: usize) -> LineGraph {
    let edges = lexicographic_edges(n);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(i, j)) in edges.iter().enumerate() {
        incident[i].push(k);
        incident[j].push(k);
    }
    let mut arcs = Vec::with_capacity(n * (n - 1) * (n.saturating_sub(2)));
    for inc in &incident {
        for &a in inc {
            for &b in inc {
                if a != b {
                    arcs.push((a, b));
                }
            }
        }
    }
    arcs.sort_unstable();
    LineGraph { n, edges, arcs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub range: f64,
}

impl Scale {
    fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = if max > min { max - min } else { 1.0 };
        Scale { min, range }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / self.range
    }

    pub fn invert(&self, x: f64) -> f64 {
        self.min + x * self.range
    }
}

/// One training example: a line graph with scaled features and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub name: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub coords: Vec<[f64; 2]>,
    /// Original edge of each line-graph node.
    pub edges: Vec<[usize; 2]>,
    /// Min-max scaled channel values per line-graph node.
    pub features: BTreeMap<String, Vec<f64>>,
    pub feature_scale: BTreeMap<String, Scale>,
    /// Oracle regret divided by `target_scale`.
    pub target: Vec<f64>,
    /// Largest regret of the instance (1 when every regret is 0).
    pub target_scale: f64,
    pub optimal_cost: f64,
    /// Directed line-graph arcs.
    pub arcs: Vec<[usize; 2]>,
    pub undirected_arc_count: usize,
}

impl DatasetRecord {
    pub fn unscaled_feature(&self, channel: &str) -> Option<Vec<f64>> {
        let scale = self.feature_scale.get(channel)?;
        Some(self.features.get(channel)?.iter().map(|&x| scale.invert(x)).collect())
    }

    pub fn unscaled_target(&self) -> Vec<f64> {
        self.target.iter().map(|&t| t * self.target_scale).collect()
    }
}

/// Builds the record of one instance, running the exact regret oracle.
pub fn build_record(inst: &Instance, channels: &[Channel]) -> Result<DatasetRecord> {
    let n = inst.n();
    if n > HELD_KARP_MAX_N {
        return Err(Error::Capacity {
            solver: "regret oracle",
            n,
            max: HELD_KARP_MAX_N,
        });
    }
    let dm = inst.distance_matrix();
    let sol = oracle(&dm)?;
    let lg = line_graph(n);
    let feats = edge_features(inst, channels);

    let mut features = BTreeMap::new();
    let mut feature_scale = BTreeMap::new();
    for (c, values) in feats.channels.iter().zip(&feats.values) {
        let scale = Scale::fit(values);
        features.insert(c.name().to_string(), values.iter().map(|&x| scale.apply(x)).collect());
        feature_scale.insert(c.name().to_string(), scale);
    }
    let raw_target: Vec<f64> = lg.edges.iter().map(|&(i, j)| sol.regret.get(i, j)).collect();
    let max_regret = raw_target.iter().copied().fold(0.0, f64::max);
    let target_scale = if max_regret > 0.0 { max_regret } else { 1.0 };

    Ok(DatasetRecord {
        name: inst.name.clone(),
        n,
        seed: inst.seed,
        coords: inst.coords.iter().map(|p| [p.x, p.y]).collect(),
        edges: lg.edges.iter().map(|&(i, j)| [i, j]).collect(),
        features,
        feature_scale,
        target: raw_target.iter().map(|&r| r / target_scale).collect(),
        target_scale,
        optimal_cost: sol.cost,
        undirected_arc_count: lg.undirected_arc_count(),
        arcs: lg.arcs.iter().map(|&(a, b)| [a, b]).collect(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct ExportSummary {
    pub written: usize,
    /// `(instance name, reason)` for every skipped instance.
    pub skipped: Vec<(String, String)>,
}

/// Writes one JSON line per instance to `path`. Instances the oracle cannot
/// handle are skipped and reported.
pub fn export_dataset(instances: &[Instance], channels: &[Channel], path: impl AsRef<Path>) -> Result<ExportSummary> {
    let path = path.as_ref();
    let built: Vec<Result<DatasetRecord>> = instances.par_iter().map(|inst| build_record(inst, channels)).collect();
    let mut summary = ExportSummary::default();
    let mut out = Vec::new();
    for (inst, rec) in instances.iter().zip(built) {
        match rec {
            Ok(rec) => {
                serde_json::to_writer(&mut out, &rec)?;
                out.push(b'\n');
                summary.written += 1;
            }
            Err(e @ Error::Capacity { .. }) => {
                log::warn!("skipping {}: {e}", inst.name);
                summary.skipped.push((inst.name.clone(), e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::file(path, e))?;
    file.write_all(&out).map_err(|e| Error::file(path, e))?;
    Ok(summary)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Deterministic shuffle-split into `(train, validation)`.
pub fn split_dataset<T>(mut records: Vec<T>, fractions: (f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (train_frac, val_frac) = fractions;
    if !(train_frac >= 0.0 && val_frac >= 0.0) || (train_frac + val_frac - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be nonnegative and sum to 1, got {train_frac} + {val_frac}"
        )));
    }
    let train_len = (train_frac * records.len() as f64).round() as usize;
    if train_len == 0 || train_len >= records.len() {
        return Err(Error::InvalidArgument(format!(
            "split of {} records at {train_frac}/{val_frac} leaves an empty partition",
            records.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    let validation = records.split_off(train_len);
    Ok((records, validation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_line_graph() {
        let lg = line_graph(3);
        assert_eq!(lg.node_count(), 3);
        assert_eq!(lg.undirected_arc_count(), 3);
        assert_eq!(lg.arcs.len(), 6);
    }

    #[test]
    fn k4_line_graph() {
        let lg = line_graph(4);
        assert_eq!(lg.node_count(), 6);
        assert_eq!(lg.undirected_arc_count(), 12);
        assert_eq!(lg.arcs.len(), 24);
    }

    #[test]
    fn adjacency_is_symmetric_with_uniform_degree() {
        let n = 7;
        let lg = line_graph(n);
        assert_eq!(lg.node_count(), 21);
        let set: std::collections::HashSet<_> = lg.arcs.iter().copied().collect();
        let mut degree = vec![0; lg.node_count()];
        for &(a, b) in &lg.arcs {
            assert!(set.contains(&(b, a)));
            let (ea, eb) = (lg.edges[a], lg.edges[b]);
            assert!(ea.0 == eb.0 || ea.0 == eb.1 || ea.1 == eb.0 || ea.1 == eb.1);
            degree[a] += 1;
        }
        assert!(degree.iter().all(|&d| d == 2 * (n - 2)));
        for (k, &(i, j)) in lg.edges.iter().enumerate() {
            assert_eq!(lg.node_of(i, j), k);
            assert_eq!(lg.node_of(j, i), k);
        }
    }

    #[test]
    fn record_scaling() {
        let inst = Instance::random(8, 1).unwrap();
        let rec = build_record(&inst, &Channel::ALL).unwrap();
        assert_eq!(rec.target.len(), 28);
        assert!(rec.target.iter().all(|&t| (0.0..=1.0).contains(&t)));
        assert!(rec.target.iter().filter(|&&t| t == 0.0).count() >= 8);
        assert!(rec.target.iter().any(|&t| t == 1.0));
        for (name, vals) in &rec.features {
            assert!(vals.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)), "{name}");
            assert!(rec.feature_scale[name].range > 0.0);
        }
        let dm = inst.distance_matrix();
        let w = rec.unscaled_feature("weight").unwrap();
        for (k, &[i, j]) in rec.edges.iter().enumerate() {
            assert!((w[k] - dm.get(i, j)).abs() <= 1e-12);
        }
    }

    #[test]
    fn oversized_instances_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let insts = vec![Instance::random(6, 0).unwrap(), Instance::random(21, 0).unwrap()];
        let summary = export_dataset(&insts, &[Channel::Weight], &path).unwrap();
        assert_eq!(summary.written, 1);
        assert_eq!(summary.skipped.len(), 1);
        assert_eq!(read_dataset(&path).unwrap().len(), 1);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let recs: Vec<usize> = (0..100).collect();
        let (tr, va) = split_dataset(recs.clone(), (0.9, 0.1), 5).unwrap();
        assert_eq!((tr.len(), va.len()), (90, 10));
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort_unstable();
        assert_eq!(all, recs);
        assert_eq!(split_dataset(recs.clone(), (0.9, 0.1), 5).unwrap(), (tr, va));
        assert!(split_dataset(recs.clone(), (0.5, 0.4), 5).is_err());
        assert!(split_dataset(vec![1, 2], (1.0, 0.0), 5).is_err());
    }
}
