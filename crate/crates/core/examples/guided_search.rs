// Guided local search with the edge-weight guide and the exact regret
// guide, plus the convergence trace.

use std::time::Duration;

use regret_gls::gls::{solve, Guide, SolveParams};
use regret_gls::instance::Instance;
use regret_gls::regret::oracle;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::random(20, 11)?;
    let dm = inst.distance_matrix();
    let exact = oracle(&dm)?;
    let params = SolveParams {
        time_budget: Duration::from_millis(300),
        ..SolveParams::default()
    };
    for (name, guide) in [("weight", Guide::Weight), ("regret", Guide::Regret(exact.regret.clone()))] {
        let out = solve(&dm, &guide, &params)?;
        println!(
            "{name:>6} guide: cost {:.6} (optimum {:.6}) lambda {:.4} phases {} moves {}",
            out.cost, exact.cost, out.lambda, out.stats.perturbation_phases, out.stats.perturbation_moves
        );
        assert!(out.cost >= exact.cost - 1e-7);
    }
    let out = solve(&dm, &Guide::Weight, &params)?;
    print!("{}", out.trace.to_csv());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
