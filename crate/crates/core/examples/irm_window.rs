//! The rolling information roadmap: build, recentre, crop and dump as PPM.

use covplan::simulator::{hall_world, sense_and_update};
use covplan::world_model::{Irm, NodeId, RiskClass, WorldPoint};
use covplan::SensorParams;

fn main() -> std::io::Result<()> {
    let grid = hall_world();
    let sensor = SensorParams::default();
    let irm = Irm::new(41, 41, grid.cell_width(), WorldPoint::new(-10.0, -10.0)).expect("valid");
    let pose = grid.cell_center(19, 20);
    let (irm, _) = sense_and_update(&irm, pose, &grid, &sensor, sensor.r_max).expect("free pose");
    let count = |class| irm.nodes().iter().filter(|n| n.risk == class).count();
    println!(
        "origin {:?}: {} free, {} occupied, {} unknown",
        irm.origin(),
        count(RiskClass::Free),
        count(RiskClass::Occupied),
        count(RiskClass::Unknown)
    );
    let window = irm.window(NodeId::new(20, 20), 11, 11);
    println!("11x11 window around the robot, origin {:?}", window.origin());
    let path = std::env::temp_dir().join("covplan-irm.ppm");
    irm.write_ppm(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
