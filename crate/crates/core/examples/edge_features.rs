// Per-edge feature channels for regret models.

use regret_gls::features::{edge_features, mst_edges, Channel};
use regret_gls::instance::Instance;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::random(8, 5)?;
    let feats = edge_features(&inst, &Channel::ALL);
    print!("{:>7}", "edge");
    for c in &feats.channels {
        print!(" {:>8.8}", c.name());
    }
    println!();
    for (k, (i, j)) in feats.edges.iter().enumerate().take(10) {
        print!("{:>7}", format!("{i}-{j}"));
        for values in &feats.values {
            print!(" {:>8.4}", values[k]);
        }
        println!();
    }
    let mst = mst_edges(&inst.distance_matrix());
    assert_eq!(mst.len(), inst.n() - 1);
    println!("mst: {mst:?}");
    Ok(())
}

fn main() {
    run_example().unwrap();
}
