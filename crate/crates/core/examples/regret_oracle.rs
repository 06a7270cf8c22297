// Exact global regret: the unit square and a random 10-node instance.

use regret_gls::instance::Instance;
use regret_gls::regret::{brute_force, fixed_edge_optimum, format_regret_csv, oracle};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let square = Instance::from_xy("square", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])?;
    let dm = square.distance_matrix();
    let sol = oracle(&dm)?;
    println!("square: optimum {} diagonal regret {:.5}", sol.cost, sol.regret.get(0, 2));
    assert!((sol.regret.get(0, 2) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-9);

    let inst = Instance::random(10, 1)?;
    let dm = inst.distance_matrix();
    let sol = oracle(&dm)?;
    let (_, bf) = brute_force(&dm)?;
    println!("{}: held-karp {:.6} brute force {:.6}", inst.name, sol.cost, bf);
    println!("tour {:?}", sol.tour.order());
    let (i, j) = (3, 7);
    let fixed = fixed_edge_optimum(&dm, i, j)?;
    println!("best tour through ({i},{j}) {fixed:.6}, regret {:.6}", sol.regret.get(i, j));
    print!("{}", format_regret_csv(&sol.regret).lines().take(5).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}

fn main() {
    run_example().unwrap();
}
