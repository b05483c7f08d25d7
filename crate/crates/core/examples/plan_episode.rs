//! One planning episode of the adaptive planner in a partly mapped hall:
//! sense, plan with MCTS, print the extracted action sequence and trace.

use covplan::decision_core::{Direction, JointState, RewardWeights, RobotState};
use covplan::planner::{CoveragePlanner, PlannerConfig, RangeMode};
use covplan::simulator::{hall_world, sense_in_place};
use covplan::world_model::{Irm, WorldPoint};
use covplan::SensorParams;

fn main() {
    let grid = hall_world();
    let sensor = SensorParams::default();
    let mut irm = Irm::new(grid.width(), grid.height(), grid.cell_width(), WorldPoint::default())
        .expect("valid lattice");
    let pose = grid.cell_center(19, 20);
    let scan = sense_in_place(&mut irm, pose, &grid, &sensor, sensor.r_max).expect("free pose");
    let window = irm.window(irm.nearest_node(pose).expect("pose on the lattice"), 50, 50);
    let node = window.nearest_node(pose).expect("window holds the robot");
    let s = JointState::new(RobotState::new(node, Direction::N), window).expect("free ground");

    let mut planner = CoveragePlanner::new(
        sensor,
        RewardWeights::default(),
        PlannerConfig::default(),
        RangeMode::Adaptive { alpha: 2.0 },
    );
    let out = planner.plan(&s, &scan, 7).expect("valid mask");
    let t = &out.trace;
    println!(
        "r_spac {:.2} m, r_adapt {:.2} m, k_d {:.3}, {} simulations, {} tree nodes",
        t.r_spac, t.r_adapt, t.k_d, t.simulations, t.tree_nodes
    );
    if out.sequence.is_empty() {
        println!("nothing above the reward floor: hand over to the global fallback");
    }
    for step in &out.sequence.steps {
        println!("  {:?}  reward {:+.3}", step.action, step.reward);
    }
}
