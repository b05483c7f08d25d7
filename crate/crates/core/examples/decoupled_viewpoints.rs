//! The decoupled baseline: greedy viewpoint selection, then a tour.

use covplan::baselines::{decoupled_plan, DecoupledConfig};
use covplan::decision_core::{Direction, JointState, RewardWeights, RobotState};
use covplan::simulator::{hall_world, sense_in_place};
use covplan::world_model::{Irm, WorldPoint};
use covplan::SensorParams;

fn main() {
    let grid = hall_world();
    let sensor = SensorParams::default();
    let mut irm = Irm::new(grid.width(), grid.height(), grid.cell_width(), WorldPoint::default())
        .expect("valid lattice");
    let pose = grid.cell_center(9, 12);
    sense_in_place(&mut irm, pose, &grid, &sensor, sensor.r_max).expect("free pose");
    let node = irm.nearest_node(pose).expect("on lattice");
    let s = JointState::new(RobotState::new(node, Direction::N), irm).expect("free");
    let cfg = DecoupledConfig {
        budget: 30.0,
        ..DecoupledConfig::default()
    };
    let plan = decoupled_plan(&s, &sensor, &RewardWeights::default(), &cfg);
    println!("{} viewpoints selected:", plan.viewpoints.len());
    for (n, gain) in &plan.viewpoints.viewpoints {
        println!("  {n}  gain {gain:.2}");
    }
    println!(
        "visit order {:?}, tour cost {:.2}, {} actions",
        plan.order,
        plan.tour_cost,
        plan.sequence.len()
    );
}
