// Line-graph dataset export and a train/validation split.

use regret_gls::data::{export_dataset, line_graph, read_dataset, split_dataset};
use regret_gls::features::Channel;
use regret_gls::instance::random_set;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let lg = line_graph(10);
    println!("line graph of K10: {} nodes, {} arcs", lg.node_count(), lg.arcs.len());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("tsp10.jsonl");
    let set = random_set(10, 10, 100)?;
    let summary = export_dataset(&set, &[Channel::Weight, Channel::NeighborRankIJ, Channel::Mst], &path)?;
    println!("exported {} records", summary.written);

    let records = read_dataset(&path)?;
    let r = &records[0];
    println!(
        "{}: {} edges, channels {:?}, target scale {:.4}",
        r.name,
        r.edges.len(),
        r.features.keys().collect::<Vec<_>>(),
        r.target_scale
    );
    let (train, val) = split_dataset(records, (0.8, 0.2), 0)?;
    println!("train {} / validation {}", train.len(), val.len());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
