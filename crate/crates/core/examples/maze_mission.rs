//! Closed-loop exploration of the benchmark maze with every planner.
//!
//! ```text
//! cargo run --release --example maze_mission -- 1500
//! ```

use std::time::Instant;

use covplan::simulator::{run_mission, standard_maze, MissionConfig, PlannerKind};

fn main() {
    let steps = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("step limit"))
        .unwrap_or(2000);
    let grid = standard_maze();
    println!("maze: {:.0} m2 reachable", grid.reachable_area());
    let cfg = MissionConfig {
        step_limit: steps,
        ..MissionConfig::default()
    };
    for kind in [PlannerKind::Adaptive, PlannerKind::Lf4, PlannerKind::Lf8] {
        let t = Instant::now();
        let log = run_mission(&grid, kind, &cfg, 1).expect("mission runs");
        let fallback = log.records.iter().filter(|r| r.fallback).count();
        println!(
            "{kind:>9}: {:7.1} m2 {:7.1} m {:5} steps ({fallback} on fallback), {:?}, {:.1} s",
            log.covered_area(),
            log.path_length(),
            log.steps(),
            log.termination,
            t.elapsed().as_secs_f64()
        );
    }
}
