// Baseline heuristics on 100 random n=20 instances against reference
// mean gaps (NN 17.448, FI 2.242, NN + local search 1.824).

use std::sync::OnceLock;

use regret_gls::bench::{reference_optima, run_unfixed, Reference, RunOptions, SolverConfig};
use regret_gls::instance::{random_set, Instance};

fn desk_set() -> &'static (Vec<Instance>, Vec<Option<Reference>>) {
    static SET: OnceLock<(Vec<Instance>, Vec<Option<Reference>>)> = OnceLock::new();
    SET.get_or_init(|| {
        let set = random_set(20, 100, 8000).unwrap();
        let refs = reference_optima(&set).unwrap();
        (set, refs)
    })
}

fn mean_gap(config: SolverConfig) -> (f64, f64) {
    let (set, refs) = desk_set();
    let report = run_unfixed(set, refs, &config, &RunOptions::default()).unwrap();
    assert_eq!(report.summary.count, 100);
    assert!(report.rows.iter().all(|r| r.gap_pct.unwrap() >= 0.0));
    (report.summary.mean_gap, report.summary.std_gap)
}

#[test]
fn nearest_neighbor_gap_magnitude() {
    let (gap, std) = mean_gap(SolverConfig::NearestNeighbor);
    println!("nn {gap:.3}±{std:.3}");
    assert!((gap - 17.448).abs() <= 10.0, "{gap}");
}

#[test]
fn farthest_insertion_gap() {
    let (gap, std) = mean_gap(SolverConfig::FarthestInsertion);
    println!("fi {gap:.3}±{std:.3}");
    assert!((gap - 2.242).abs() <= 2.0, "{gap}");
}

#[test]
fn local_search_gap() {
    let (gap, std) = mean_gap(SolverConfig::LocalSearch);
    println!("ls {gap:.3}±{std:.3}");
    assert!((gap - 1.824).abs() <= 1.5, "{gap}");
}

#[test]
fn unfixed_costs_repeat() {
    let set = random_set(20, 10, 8100).unwrap();
    let refs = reference_optima(&set).unwrap();
    let a = run_unfixed(&set, &refs, &SolverConfig::LocalSearch, &RunOptions::default()).unwrap();
    let b = run_unfixed(&set, &refs, &SolverConfig::LocalSearch, &RunOptions { workers: 4, ..RunOptions::default() }).unwrap();
    let costs = |r: &regret_gls::bench::GapReport| r.rows.iter().map(|x| x.cost).collect::<Vec<_>>();
    assert_eq!(costs(&a), costs(&b));
}
