//! The global fallback: risk-weighted shortest path to the nearest frontier.

use covplan::decision_core::{Direction, JointState, RobotState};
use covplan::planner::{frontier_nodes, global_fallback};
use covplan::simulator::{corridor_world, sense_in_place};
use covplan::world_model::{Irm, WorldPoint};
use covplan::SensorParams;

fn main() {
    let grid = corridor_world();
    let sensor = SensorParams::default();
    let mut irm = Irm::new(grid.width(), grid.height(), grid.cell_width(), WorldPoint::default())
        .expect("valid lattice");
    sense_in_place(&mut irm, grid.start(), &grid, &sensor, sensor.r_max).expect("free start");
    let node = irm.nearest_node(grid.start()).expect("on lattice");
    println!("{} frontier nodes after the first scan", frontier_nodes(&irm).len());
    let s = JointState::new(RobotState::new(node, Direction::E), irm).expect("free start");
    match global_fallback(&s, 2.0) {
        Some(plan) => {
            let path = plan.path_in(&s.world);
            println!(
                "fallback: {} steps, {:.2} m, ends at cell {:?}",
                plan.len(),
                plan.length(),
                path.last().expect("non-empty")
            );
        }
        None => println!("no frontier left: exploration complete"),
    }
}
