//! Experiment harness: optimality gaps, fixed-time and unfixed runs,
//! aggregate tables and convergence profiles.
//!
//! Standard deviations are population deviations (divide by N).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::construct::{farthest_insertion, nearest_insertion, nearest_neighbor};
use crate::error::{Error, Result};
use crate::gls::{guided_local_search, ConvergenceTrace, Guide, SolveParams, OPTIMAL_ABS_TOL};
use crate::instance::{DistanceMatrix, Instance};
use crate::regret::{held_karp, load_regret_for, oracle, HELD_KARP_MAX_N};
use crate::search::local_search_with;
use crate::tour::{format_tour_line, parse_tour_line, tour_cost, Tour};

/// Best-known optimal tour lengths of common TSPLIB instances (rounded
/// EUC_2D). These are literature values, not oracle output.
pub const TSPLIB_BEST_KNOWN: &[(&str, f64)] = &[
    ("berlin52", 7542.0),
    ("eil51", 426.0),
    ("eil76", 538.0),
    ("kroA100", 21282.0),
    ("pr76", 108159.0),
    ("rat99", 1211.0),
    ("st70", 675.0),
];

pub fn best_known(name: &str) -> Option<f64> {
    TSPLIB_BEST_KNOWN
        .iter()
        .find(|(k, _)| *k == name)
        .map(|&(_, v)| v)
}

/// Percent gap `(cost / optimum - 1) * 100`.
pub fn optimality_gap(cost: f64, optimum: f64) -> Result<f64> {
    if !(optimum > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference optimum must be positive, got {optimum}"
        )));
    }
    Ok((cost / optimum - 1.0) * 100.0)
}

/// True when `cost` is within the absolute 1e-7 threshold of `optimum`.
pub fn is_optimal(cost: f64, optimum: f64) -> bool {
    (cost - optimum).abs() <= OPTIMAL_ABS_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Exact Held–Karp optimum.
    Oracle,
    /// Bundled literature value.
    BestKnown,
    /// Supplied by the caller (for example, the best of long runs).
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub source: ReferenceSource,
}

/// Exact optima for instances the oracle handles, bundled values for known
/// TSPLIB names, nothing otherwise.
pub fn reference_optima(instances: &[Instance]) -> Result<Vec<Option<Reference>>> {
    instances
        .iter()
        .map(|inst| {
            if inst.n() <= HELD_KARP_MAX_N {
                let (_, value) = held_karp(&inst.distance_matrix())?;
                Ok(Some(Reference {
                    value,
                    source: ReferenceSource::Oracle,
                }))
            } else {
                Ok(best_known(&inst.name).map(|value| Reference {
                    value,
                    source: ReferenceSource::BestKnown,
                }))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum GuideSource {
    Weight,
    /// Exact regret, computed inside the timed region.
    Oracle,
    /// Directory holding `<instance name>.csv` regret files.
    RegretDir(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverConfig {
    NearestNeighbor,
    FarthestInsertion,
    NearestInsertion,
    /// Nearest neighbor followed by 2-opt/relocate descent.
    LocalSearch,
    Gls { guide: GuideSource, params: SolveParams },
}

impl SolverConfig {
    pub fn name(&self) -> String {
        match self {
            SolverConfig::NearestNeighbor => "nn".into(),
            SolverConfig::FarthestInsertion => "fi".into(),
            SolverConfig::NearestInsertion => "ni".into(),
            SolverConfig::LocalSearch => "ls".into(),
            SolverConfig::Gls { guide, .. } => match guide {
                GuideSource::Weight => "gls-weight".into(),
                GuideSource::Oracle => "gls-oracle".into(),
                GuideSource::RegretDir(_) => "gls-regret".into(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveRecord {
    pub tour: Tour,
    pub cost: f64,
    pub elapsed_s: f64,
    pub trace: ConvergenceTrace,
}

/// Runs one solver on one instance. The clock starts before any guide is
/// loaded or computed; `budget` bounds the whole call for GLS and local
/// search, and `stop_at` lets GLS return as soon as that cost is reached.
pub fn solve_instance(
    inst: &Instance,
    config: &SolverConfig,
    budget: Option<Duration>,
    stop_at: Option<f64>,
) -> Result<SolveRecord> {
    let clock = Instant::now();
    let dm = inst.distance_matrix();
    let single = |tour: Tour, dm: &DistanceMatrix| {
        let cost = tour_cost(dm, &tour);
        let t = clock.elapsed().as_secs_f64();
        SolveRecord {
            trace: ConvergenceTrace {
                samples: vec![(t, cost)],
                best_tour: tour.clone(),
            },
            tour,
            cost,
            elapsed_s: t,
        }
    };
    let record = match config {
        SolverConfig::NearestNeighbor => single(nearest_neighbor(&dm, 0), &dm),
        SolverConfig::FarthestInsertion => single(farthest_insertion(&dm), &dm),
        SolverConfig::NearestInsertion => single(nearest_insertion(&dm, 0), &dm),
        SolverConfig::LocalSearch => {
            let mut tour = nearest_neighbor(&dm, 0);
            let mut samples = vec![(clock.elapsed().as_secs_f64(), tour_cost(&dm, &tour))];
            let deadline = budget.map(|b| clock + b);
            local_search_with(&dm, &mut tour, deadline, |t, _| {
                samples.push((clock.elapsed().as_secs_f64(), tour_cost(&dm, t)));
            });
            let cost = tour_cost(&dm, &tour);
            let elapsed_s = clock.elapsed().as_secs_f64();
            samples.push((elapsed_s, cost));
            SolveRecord {
                trace: ConvergenceTrace {
                    samples: monotone(samples),
                    best_tour: tour.clone(),
                },
                tour,
                cost,
                elapsed_s,
            }
        }
        SolverConfig::Gls { guide, params } => {
            let guide = match guide {
                GuideSource::Weight => Guide::Weight,
                GuideSource::Oracle => Guide::Regret(oracle(&dm)?.regret),
                GuideSource::RegretDir(dir) => {
                    let path = dir.join(format!("{}.csv", inst.name));
                    Guide::Regret(load_regret_for(path, inst.n())?.matrix)
                }
            };
            let mut params = params.clone();
            if stop_at.is_some() {
                params.stop_at_cost = stop_at;
            }
            let budget = budget.unwrap_or(params.time_budget);
            let out = guided_local_search(&dm, &guide, &params, clock, clock + budget)?;
            SolveRecord {
                tour: out.tour,
                cost: out.cost,
                elapsed_s: clock.elapsed().as_secs_f64(),
                trace: out.trace,
            }
        }
    };
    Ok(record)
}

fn monotone(samples: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for (t, c) in samples {
        match out.last_mut() {
            Some(last) if t <= last.0 => last.1 = last.1.min(c),
            Some(last) if c >= last.1 => {
                let best = last.1;
                out.push((t, best));
            }
            _ => out.push((t, c)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub instance: String,
    pub cost: f64,
    pub reference: Option<Reference>,
    pub gap_pct: Option<f64>,
    pub optimal: Option<bool>,
    pub elapsed_s: f64,
}

impl GapRow {
    pub fn new(instance: impl Into<String>, cost: f64, reference: Option<Reference>, elapsed_s: f64) -> Result<Self> {
        let (gap_pct, optimal) = match reference {
            Some(r) => (Some(optimality_gap(cost, r.value)?), Some(is_optimal(cost, r.value))),
            None => (None, None),
        };
        Ok(GapRow {
            instance: instance.into(),
            cost,
            reference,
            gap_pct,
            optimal,
            elapsed_s,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSummary {
    /// Rows with a reference, i.e. those entering the aggregates.
    pub count: usize,
    pub excluded: usize,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub pct_optimal: f64,
    pub mean_time: f64,
    pub std_time: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl GapSummary {
    pub fn from_rows(rows: &[GapRow]) -> Self {
        let scored: Vec<&GapRow> = rows.iter().filter(|r| r.gap_pct.is_some()).collect();
        let gaps: Vec<f64> = scored.iter().filter_map(|r| r.gap_pct).collect();
        let times: Vec<f64> = scored.iter().map(|r| r.elapsed_s).collect();
        let optimal = scored.iter().filter(|r| r.optimal == Some(true)).count();
        let (mean_gap, std_gap) = mean_std(&gaps);
        let (mean_time, std_time) = mean_std(&times);
        GapSummary {
            count: scored.len(),
            excluded: rows.len() - scored.len(),
            mean_gap,
            std_gap,
            pct_optimal: if scored.is_empty() {
                f64::NAN
            } else {
                100.0 * optimal as f64 / scored.len() as f64
            },
            mean_time,
            std_time,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub solver: String,
    pub rows: Vec<GapRow>,
    pub tours: Vec<Tour>,
    pub summary: GapSummary,
}

pub const REPORT_HEADER: &str = "instance,cost,optimum,gap_pct,optimal,elapsed_s";
pub const SUMMARY_HEADER: &str = "stat,gap_pct,optimal_pct,elapsed_s";
pub const PROFILE_HEADER: &str = "elapsed_s,mean_gap_pct,optimal_pct";

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl GapReport {
    pub fn from_rows(solver: impl Into<String>, rows: Vec<GapRow>, tours: Vec<Tour>) -> Self {
        let summary = GapSummary::from_rows(&rows);
        if summary.excluded > 0 {
            log::warn!("{} instance(s) without a reference optimum excluded from aggregates", summary.excluded);
        }
        GapReport {
            solver: solver.into(),
            rows,
            tours,
            summary,
        }
    }

    /// Per-instance CSV; undefined gaps are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:?},{},{},{},{:?}",
                r.instance,
                r.cost,
                opt_field(r.reference.map(|x| x.value)),
                opt_field(r.gap_pct),
                r.optimal.map(|o| o.to_string()).unwrap_or_default(),
                r.elapsed_s
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        summary_csv(&self.summary)
    }

    /// Tour file: one `format_tour_line` per instance.
    pub fn tours_text(&self) -> String {
        let mut out = String::new();
        for (r, t) in self.rows.iter().zip(&self.tours) {
            out.push_str(&format_tour_line(&r.instance, r.cost, t));
            out.push('\n');
        }
        out
    }

    /// Writes `report.csv`, `summary.csv` and `tours.txt` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        for (file, body) in [
            ("report.csv", self.to_csv()),
            ("summary.csv", self.summary_csv()),
            ("tours.txt", self.tours_text()),
        ] {
            let path = dir.join(file);
            fs::write(&path, body).map_err(|e| Error::file(&path, e))?;
        }
        Ok(())
    }
}

pub fn summary_csv(s: &GapSummary) -> String {
    format!(
        "{SUMMARY_HEADER}\nmean,{:?},{:?},{:?}\nstd,{:?},,{:?}\n",
        s.mean_gap, s.pct_optimal, s.mean_time, s.std_gap, s.std_time
    )
}

/// Parses a report CSV back into rows (reference sources are not stored,
/// so they come back as [`ReferenceSource::External`]).
pub fn parse_report_csv(text: &str) -> Result<Vec<GapRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header `{REPORT_HEADER}`"))),
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse().map_err(|_| Error::parse(line, format!("bad number `{s}`")))
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse(line_no, "expected 6 fields"));
        }
        let reference = if f[2].is_empty() {
            None
        } else {
            Some(Reference {
                value: num(f[2], line_no)?,
                source: ReferenceSource::External,
            })
        };
        rows.push(GapRow {
            instance: f[0].to_string(),
            cost: num(f[1], line_no)?,
            reference,
            gap_pct: if f[3].is_empty() { None } else { Some(num(f[3], line_no)?) },
            optimal: match f[4] {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(Error::parse(line_no, format!("bad flag `{other}`"))),
            },
            elapsed_s: num(f[5], line_no)?,
        });
    }
    Ok(rows)
}

/// Recomputes every tour cost in a tour file and returns the largest
/// absolute difference from the recorded cost.
pub fn verify_tours(instances: &[Instance], tours_text: &str) -> Result<f64> {
    let by_name: BTreeMap<&str, &Instance> = instances.iter().map(|i| (i.name.as_str(), i)).collect();
    let mut worst = 0.0f64;
    for line in tours_text.lines().filter(|l| !l.trim().is_empty()) {
        let (name, cost, tour) = parse_tour_line(line)?;
        let inst = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("tour for unknown instance `{name}`")))?;
        if tour.len() != inst.n() {
            return Err(Error::DimensionMismatch {
                expected: inst.n(),
                found: tour.len(),
            });
        }
        worst = worst.max((tour_cost(&inst.distance_matrix(), &tour) - cost).abs());
    }
    Ok(worst)
}

/// Worker count actually used: at least 1, at most the available cores.
pub fn effective_workers(requested: usize) -> usize {
    let cores = thread::available_parallelism().map_or(1, |c| c.get());
    requested.clamp(1, cores)
}

fn run_all<T: Send>(
    count: usize,
    workers: usize,
    job: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..count).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..effective_workers(workers).min(count) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= count {
                    break;
                }
                let r = job(k);
                slots.lock().expect("worker panicked")[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Let GLS stop once the reference optimum is reached. The best cost at
    /// the budget is unchanged since it can only decrease.
    pub stop_at_reference: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            stop_at_reference: false,
        }
    }
}

fn check_inputs(instances: &[Instance], refs: &[Option<Reference>]) -> Result<()> {
    if instances.is_empty() {
        return Err(Error::InvalidArgument("empty problem set".into()));
    }
    if instances.len() != refs.len() {
        return Err(Error::DimensionMismatch {
            expected: instances.len(),
            found: refs.len(),
        });
    }
    Ok(())
}

fn run(
    instances: &[Instance],
    refs: &[Option<Reference>],
    config: &SolverConfig,
    budget: Option<Duration>,
    opts: &RunOptions,
) -> Result<(GapReport, Vec<ConvergenceTrace>)> {
    check_inputs(instances, refs)?;
    let records = run_all(instances.len(), opts.workers, |k| {
        let stop_at = if opts.stop_at_reference {
            refs[k].map(|r| r.value)
        } else {
            None
        };
        solve_instance(&instances[k], config, budget, stop_at)
    })?;
    let mut rows = Vec::with_capacity(records.len());
    let mut tours = Vec::with_capacity(records.len());
    let mut traces = Vec::with_capacity(records.len());
    for ((inst, r), rec) in instances.iter().zip(refs).zip(records) {
        rows.push(GapRow::new(&inst.name, rec.cost, *r, rec.elapsed_s)?);
        tours.push(rec.tour);
        traces.push(rec.trace);
    }
    Ok((GapReport::from_rows(config.name(), rows, tours), traces))
}

/// One solve per instance with no time limit beyond the solver's own
/// stopping rule (GLS uses its configured budget).
pub fn run_unfixed(
    instances: &[Instance],
    refs: &[Option<Reference>],
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<GapReport> {
    Ok(run(instances, refs, config, None, opts)?.0)
}

/// One solve per instance under a wall-clock budget, with traces.
pub fn run_fixed_time(
    instances: &[Instance],
    refs: &[Option<Reference>],
    config: &SolverConfig,
    budget: Duration,
    opts: &RunOptions,
) -> Result<(GapReport, Vec<ConvergenceTrace>)> {
    run(instances, refs, config, Some(budget), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub elapsed_s: f64,
    pub mean_gap_pct: f64,
    pub optimal_pct: f64,
}

/// Evenly spaced grid `0, budget/steps, ..., budget`.
pub fn time_grid(budget_s: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|k| budget_s * k as f64 / steps as f64).collect()
}

/// Mean gap and percent optimal at each grid time, reading each trace as a
/// step function. Instances without a reference are skipped.
pub fn profile(traces: &[ConvergenceTrace], refs: &[Option<Reference>], grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    if traces.len() != refs.len() {
        return Err(Error::DimensionMismatch {
            expected: traces.len(),
            found: refs.len(),
        });
    }
    let scored: Vec<(&ConvergenceTrace, f64)> = traces
        .iter()
        .zip(refs)
        .filter_map(|(t, r)| r.map(|r| (t, r.value)))
        .collect();
    grid.iter()
        .map(|&at| {
            let mut gaps = Vec::with_capacity(scored.len());
            let mut optimal = 0usize;
            for &(trace, opt) in &scored {
                let c = trace.cost_at(at);
                gaps.push(optimality_gap(c, opt)?);
                optimal += usize::from(is_optimal(c, opt));
            }
            let (mean_gap_pct, _) = mean_std(&gaps);
            Ok(ProfilePoint {
                elapsed_s: at,
                mean_gap_pct,
                optimal_pct: 100.0 * optimal as f64 / scored.len().max(1) as f64,
            })
        })
        .collect()
}

pub fn profile_csv(points: &[ProfilePoint]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for p in points {
        let _ = writeln!(out, "{:?},{:?},{:?}", p.elapsed_s, p.mean_gap_pct, p.optimal_pct);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_set;

    #[test]
    fn gap_arithmetic() {
        assert_eq!(optimality_gap(1.0, 1.0).unwrap(), 0.0);
        assert!((optimality_gap(1.02, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(optimality_gap(1.0, 0.0).is_err());
        assert!(optimality_gap(1.0, -2.0).is_err());
    }

    #[test]
    fn optimal_flag_is_absolute() {
        assert!(is_optimal(100.0 + 5e-8, 100.0));
        assert!(!is_optimal(100.0 + 2e-7, 100.0));
        assert!(is_optimal(2e-7, 1e-7));
    }

    #[test]
    fn missing_reference_is_excluded() {
        let rows = vec![
            GapRow::new("a", 11.0, Some(Reference { value: 10.0, source: ReferenceSource::Oracle }), 1.0).unwrap(),
            GapRow::new("b", 5.0, None, 3.0).unwrap(),
        ];
        let s = GapSummary::from_rows(&rows);
        assert_eq!((s.count, s.excluded), (1, 1));
        assert!((s.mean_gap - 10.0).abs() < 1e-12);
        assert_eq!(s.std_gap, 0.0);
        assert_eq!(s.mean_time, 1.0);
        assert_eq!(s.pct_optimal, 0.0);
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn empty_set_rejected() {
        assert!(run_unfixed(&[], &[], &SolverConfig::NearestNeighbor, &RunOptions::default()).is_err());
    }

    #[test]
    fn report_roundtrip_and_tours_revalidate() {
        let insts = random_set(9, 6, 40).unwrap();
        let refs = reference_optima(&insts).unwrap();
        let report = run_unfixed(&insts, &refs, &SolverConfig::LocalSearch, &RunOptions::default()).unwrap();
        let rows = parse_report_csv(&report.to_csv()).unwrap();
        let again = GapSummary::from_rows(&rows);
        assert_eq!(again.mean_gap, report.summary.mean_gap);
        assert_eq!(again.std_gap, report.summary.std_gap);
        assert_eq!(again.pct_optimal, report.summary.pct_optimal);
        assert!(verify_tours(&insts, &report.tours_text()).unwrap() <= 1e-9);
        assert!(report.rows.iter().all(|r| r.gap_pct.unwrap() >= -1e-9));
    }

    #[test]
    fn profile_endpoints() {
        let insts = random_set(10, 4, 2).unwrap();
        let refs = reference_optima(&insts).unwrap();
        let config = SolverConfig::Gls {
            guide: GuideSource::Weight,
            params: SolveParams::default(),
        };
        let (report, traces) =
            run_fixed_time(&insts, &refs, &config, Duration::from_millis(100), &RunOptions::default()).unwrap();
        let grid = time_grid(0.1, 10);
        let p = profile(&traces, &refs, &grid).unwrap();
        assert_eq!(p.len(), grid.len());
        let last = profile(&traces, &refs, &[1e9]).unwrap()[0];
        assert_eq!(last.mean_gap_pct, report.summary.mean_gap);
        assert_eq!(last.optimal_pct, report.summary.pct_optimal);
        let first = profile(&traces, &refs, &[0.0]).unwrap()[0];
        let nn = run_unfixed(&insts, &refs, &SolverConfig::NearestNeighbor, &RunOptions::default()).unwrap();
        assert!((first.mean_gap_pct - nn.summary.mean_gap).abs() < 1e-9);
        assert!(p.windows(2).all(|w| w[0].optimal_pct <= w[1].optimal_pct));
        assert_eq!(profile_csv(&p).lines().count(), grid.len() + 1);
    }
}
