// Fixed-time benchmark over a small random set with a convergence profile.

use std::time::Duration;

use regret_gls::bench::{
    profile, profile_csv, reference_optima, run_fixed_time, run_unfixed, time_grid, GuideSource, RunOptions,
    SolverConfig,
};
use regret_gls::gls::SolveParams;
use regret_gls::instance::random_set;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let set = random_set(15, 8, 0)?;
    let refs = reference_optima(&set)?;
    let opts = RunOptions::default();
    for config in [SolverConfig::NearestNeighbor, SolverConfig::FarthestInsertion, SolverConfig::LocalSearch] {
        let s = run_unfixed(&set, &refs, &config, &opts)?.summary;
        println!("{:>10}: gap {:.3}±{:.3}% optimal {:.1}%", config.name(), s.mean_gap, s.std_gap, s.pct_optimal);
    }
    let gls = SolverConfig::Gls {
        guide: GuideSource::Oracle,
        params: SolveParams::default(),
    };
    let budget = Duration::from_millis(200);
    let (report, traces) = run_fixed_time(&set, &refs, &gls, budget, &opts)?;
    let s = report.summary;
    println!("{:>10}: gap {:.3}±{:.3}% optimal {:.1}%", report.solver, s.mean_gap, s.std_gap, s.pct_optimal);
    print!("{}", report.to_csv());
    print!("{}", profile_csv(&profile(&traces, &refs, &time_grid(budget.as_secs_f64(), 4))?));
    Ok(())
}

fn main() {
    run_example().unwrap();
}
