// Construction heuristics followed by 2-opt/relocate descent.

use regret_gls::bench::optimality_gap;
use regret_gls::construct::{farthest_insertion, nearest_insertion, nearest_neighbor};
use regret_gls::instance::Instance;
use regret_gls::regret::held_karp;
use regret_gls::search::{is_local_optimum, local_search};
use regret_gls::tour::tour_cost;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::random(20, 7)?;
    let dm = inst.distance_matrix();
    let (_, opt) = held_karp(&dm)?;
    for (name, start) in [
        ("nearest neighbor", nearest_neighbor(&dm, 0)),
        ("farthest insertion", farthest_insertion(&dm)),
        ("nearest insertion", nearest_insertion(&dm, 0)),
    ] {
        let improved = local_search(&dm, &start, None);
        assert!(is_local_optimum(&dm, &improved));
        println!(
            "{name:>18}: {:.3}% -> {:.3}% after local search",
            optimality_gap(tour_cost(&dm, &start), opt)?,
            optimality_gap(tour_cost(&dm, &improved), opt)?
        );
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
