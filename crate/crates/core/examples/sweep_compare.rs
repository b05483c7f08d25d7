//! Run a small seed sweep from a config, then compare two run directories.

use covplan::experiment::{compare_runs, run_experiment, ExperimentConfig};
use covplan::simulator::corridor_world;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("covplan-sweep-example");
    std::fs::create_dir_all(&root)?;
    let map = root.join("corridor.map");
    std::fs::write(&map, corridor_world().to_map_string())?;

    let mut dirs = Vec::new();
    for (name, planner) in [("adaptive", "adaptive"), ("lf4", "lf4")] {
        let out = root.join(name);
        let text = format!(
            "[experiment]\nmap = {:?}\nplanners = [{planner:?}]\nseeds = [1, 2]\nout = {:?}\n\n[mission]\nstep_limit = 200\n",
            map.display().to_string(),
            out.display().to_string()
        );
        let cfg = ExperimentConfig::parse_with(&text, &["planner.max_simulations=500".into()])?;
        run_experiment(&cfg)?;
        dirs.push(out);
    }
    print!("{}", compare_runs(&dirs)?.to_table());
    Ok(())
}
