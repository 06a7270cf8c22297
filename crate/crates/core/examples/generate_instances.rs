// Random instance sets, the native instance file and TSPLIB conversion.

use regret_gls::instance::{parse_tsplib, random_set, read_instances, render_tsplib, write_instances};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let set = random_set(20, 5, 3)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("tsp20.txt");
    write_instances(&path, &set)?;
    let back = read_instances(&path)?;
    assert_eq!(back, set);

    let tsp = render_tsplib(&set[0]);
    let parsed = parse_tsplib(&tsp)?;
    assert_eq!(parsed.coords, set[0].coords);
    for inst in &back {
        println!("{} n={} seed={:?}", inst.name, inst.n(), inst.seed);
    }
    println!("{}", tsp.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}

fn main() {
    run_example().unwrap();
}
