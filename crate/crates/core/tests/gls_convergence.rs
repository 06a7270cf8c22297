// With a generous budget GLS reaches the exact optimum on small instances.

use std::time::Duration;

use regret_gls::bench::is_optimal;
use regret_gls::gls::{solve, Guide, SolveParams};
use regret_gls::instance::Instance;
use regret_gls::regret::held_karp;

#[test]
fn weight_guide_finds_optimum_on_small_instances() {
    let mut optimal = 0;
    let total = 100;
    for k in 0..total {
        let n = 6 + k % 7;
        let dm = Instance::random(n, 9000 + k as u64).unwrap().distance_matrix();
        let (_, opt) = held_karp(&dm).unwrap();
        let params = SolveParams {
            time_budget: Duration::from_secs(3),
            stop_at_cost: Some(opt),
            ..SolveParams::default()
        };
        let out = solve(&dm, &Guide::Weight, &params).unwrap();
        assert!(out.cost >= opt - 1e-7);
        optimal += usize::from(is_optimal(out.cost, opt));
    }
    assert!(optimal * 100 >= 99 * total, "{optimal}/{total}");
}
