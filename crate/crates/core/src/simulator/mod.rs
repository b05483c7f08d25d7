//! Ground-truth worlds, simulated sensing and closed-loop missions.

mod grid;
mod maze;
mod mission;
mod sensing;

pub use grid::{load_environment, GroundTruthGrid, DEFAULT_CELL_WIDTH, NEAR_WALL_RISK, WALL_RISK};
pub use maze::{
    corridor_world, false_opening_world, generate_maze, hall_world, standard_maze, Injection,
    MazeParams,
};
pub use mission::{
    run_mission, run_mission_with, EpisodeRecord, MissionConfig, MissionLog, PlannerKind,
    StepRecord, Termination,
};
pub use sensing::{integrate_scan, sense_and_update, sense_in_place, simulate_scan};
