//! TSP instances: random generation, TSPLIB ingestion and the native
//! line-delimited instance file.
//!
//! Random instances draw coordinates i.i.d. uniform in the unit square from a
//! `ChaCha8Rng` seeded with `seed_from_u64(seed)`, x then y for each node in
//! order. The stream is platform independent, so `(n, seed)` pins an instance
//! exactly on any machine.
//!
//! Native instance file, one instance per line, whitespace separated:
//!
//! ```text
//! <name> <n> <seed|-> <euclidean|euc2d> <x0> <y0> <x1> <y1> ...
//! ```
//!
//! Coordinates are written in shortest round-trip form so reading a file back
//! reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Index of the node used as "depot" by the engineered features.
pub const DEPOT: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Full-precision Euclidean distance.
    Euclidean,
    /// TSPLIB `EUC_2D`: Euclidean distance rounded to the nearest integer.
    Euc2dRounded,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Euc2dRounded => "euc2d",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        match s {
            "euclidean" => Some(Metric::Euclidean),
            "euc2d" => Some(Metric::Euc2dRounded),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A symmetric TSP over points in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub coords: Vec<Point>,
    pub metric: Metric,
    /// Generator seed for random instances.
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(name: impl Into<String>, coords: Vec<Point>, metric: Metric) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 nodes, got {}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "node {i} has a non-finite coordinate"
            )));
        }
        Ok(Instance {
            name: name.into(),
            coords,
            metric,
            seed: None,
        })
    }

    /// Builds a full-precision Euclidean instance from `(x, y)` pairs.
    pub fn from_xy(name: impl Into<String>, xy: &[(f64, f64)]) -> Result<Self> {
        let coords = xy.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Instance::new(name, coords, Metric::Euclidean)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Uniform random instance in `[0, 1]^2`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 nodes, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n)
            .map(|_| {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen();
                Point::new(x, y)
            })
            .collect();
        Ok(Instance {
            name: format!("rand{n}_s{seed}"),
            coords,
            metric: Metric::Euclidean,
            seed: Some(seed),
        })
    }

    /// Weight of the undirected edge `(i, j)` under the instance metric.
    pub fn edge_weight(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n();
        for index in [i, j] {
            if index >= n {
                return Err(Error::NodeOutOfRange { index, n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(self.weight_unchecked(i, j))
    }

    fn weight_unchecked(&self, i: usize, j: usize) -> f64 {
        let d = self.coords[i].dist(&self.coords[j]);
        match self.metric {
            Metric::Euclidean => d,
            // nint(d) as in the TSPLIB reference implementation: (int)(d + 0.5)
            Metric::Euc2dRounded => (d + 0.5).floor(),
        }
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.n();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weight_unchecked(i, j);
                data[i * n + j] = w;
                data[j * n + i] = w;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Same instance with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for p in &mut out.coords {
            p.x *= factor;
            p.y *= factor;
        }
        out
    }
}

/// Dense symmetric edge-weight matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from rows, validating shape, symmetry and the diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 3 {
            return Err(Error::InvalidInstance(format!("need at least 3 nodes, got {n}")));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidInstance(format!("bad weight at ({i}, {j})")));
                }
                if i == j && w != 0.0 {
                    return Err(Error::InvalidInstance(format!("nonzero diagonal at {i}")));
                }
                if w != rows[j][i] {
                    return Err(Error::InvalidInstance(format!("asymmetric at ({i}, {j})")));
                }
            }
            data.extend_from_slice(row);
        }
        Ok(DistanceMatrix { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Parses a TSPLIB `TYPE: TSP` / `EDGE_WEIGHT_TYPE: EUC_2D` document.
pub fn parse_tsplib(text: &str) -> Result<Instance> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut coords = Vec::new();
    let mut in_coords = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    line_no,
                    format!("NODE_COORD_SECTION: expected `id x y`, got `{line}`"),
                ));
            }
            let coord = |s: &str, axis: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::parse(line_no, format!("NODE_COORD_SECTION: bad {axis} coordinate `{s}`"))
                })
            };
            fields[0].parse::<i64>().map_err(|_| {
                Error::parse(line_no, format!("NODE_COORD_SECTION: bad node id `{}`", fields[0]))
            })?;
            coords.push(Point::new(coord(fields[1], "x")?, coord(fields[2], "y")?));
            continue;
        }
        if line.starts_with("NODE_COORD_SECTION") {
            match weight_type.as_deref() {
                Some("EUC_2D") => {}
                Some(other) => return Err(Error::UnsupportedMetric(other.to_string())),
                None => {
                    return Err(Error::parse(
                        line_no,
                        "NODE_COORD_SECTION before EDGE_WEIGHT_TYPE",
                    ))
                }
            }
            in_coords = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::parse(line_no, format!("expected `KEY : VALUE`, got `{line}`")));
        };
        let value = value.trim();
        match key.trim() {
            "NAME" => name = value.to_string(),
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::parse(line_no, format!("TYPE: unsupported problem `{value}`")));
                }
            }
            "DIMENSION" => {
                let d = value
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("DIMENSION: not an integer `{value}`")))?;
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(Error::UnsupportedMetric(value.to_string()));
                }
                weight_type = Some(value.to_string());
            }
            _ => {} // COMMENT, NODE_COORD_TYPE, DISPLAY_DATA_TYPE, ...
        }
    }

    let dimension = dimension.ok_or_else(|| Error::parse(0, "DIMENSION: missing"))?;
    if weight_type.is_none() {
        return Err(Error::parse(0, "EDGE_WEIGHT_TYPE: missing"));
    }
    if coords.len() != dimension {
        return Err(Error::parse(
            0,
            format!(
                "NODE_COORD_SECTION: DIMENSION is {dimension} but {} coordinates were read",
                coords.len()
            ),
        ));
    }
    Instance::new(name, coords, Metric::Euc2dRounded)
}

/// Renders an instance as a TSPLIB `EUC_2D` document.
pub fn render_tsplib(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME : {}", inst.name);
    let _ = writeln!(out, "TYPE : TSP");
    let _ = writeln!(out, "DIMENSION : {}", inst.n());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EUC_2D");
    let _ = writeln!(out, "NODE_COORD_SECTION");
    for (i, p) in inst.coords.iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?}", i + 1, p.x, p.y);
    }
    out.push_str("EOF\n");
    out
}

pub fn read_tsplib(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_tsplib(&text)
}

/// One line of the native instance file.
pub fn format_instance_line(inst: &Instance) -> String {
    let mut line = format!(
        "{} {} {} {}",
        inst.name,
        inst.n(),
        inst.seed.map_or_else(|| "-".to_string(), |s| s.to_string()),
        inst.metric.as_str()
    );
    for p in &inst.coords {
        let _ = write!(line, " {:?} {:?}", p.x, p.y);
    }
    line
}

pub fn parse_instance_line(line: &str, line_no: usize) -> Result<Instance> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| {
        it.next()
            .ok_or_else(|| Error::parse(line_no, format!("missing {what}")))
    };
    let name = next("name")?.to_string();
    let n_tok = next("n")?;
    let n: usize = n_tok
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad node count `{n_tok}`")))?;
    let seed_tok = next("seed")?;
    let seed = match seed_tok {
        "-" => None,
        s => Some(
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("bad seed `{s}`")))?,
        ),
    };
    let metric_tok = next("metric")?;
    let metric = Metric::from_token(metric_tok)
        .ok_or_else(|| Error::parse(line_no, format!("unknown metric `{metric_tok}`")))?;
    let values: Vec<f64> = it
        .map(|s| {
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("bad coordinate `{s}`")))
        })
        .collect::<Result<_>>()?;
    if values.len() != 2 * n {
        return Err(Error::parse(
            line_no,
            format!("expected {} coordinate values, found {}", 2 * n, values.len()),
        ));
    }
    let coords = values.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
    let mut inst = Instance::new(name, coords, metric)?;
    inst.seed = seed;
    Ok(inst)
}

pub fn write_instances(path: impl AsRef<Path>, instances: &[Instance]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for inst in instances {
        text.push_str(&format_instance_line(inst));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

pub fn read_instances(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_instance_line(l, i + 1))
        .collect()
}

/// `count` random instances with seeds `seed, seed + 1, ...`.
pub fn random_set(n: usize, count: usize, seed: u64) -> Result<Vec<Instance>> {
    (0..count as u64)
        .map(|k| Instance::random(n, seed.wrapping_add(k)))
        .collect()
}
