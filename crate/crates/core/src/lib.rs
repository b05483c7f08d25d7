//! Adaptive-range coverage planning for exploration of unknown environments.
//!
//! The crate is organised bottom-up:
//!
//! - [`world_model`]: the robot-centred rolling lattice (information roadmap)
//!   holding per-node traversability risk and coverage probability.
//! - [`coverage_sensor`]: the logistic coverage sensor, ray-traced coverage
//!   update, precomputed coverage masks, spaciousness filter and adaptive range.
//! - [`decision_core`]: the MDP pieces: headings, deterministic transitions,
//!   marginal coverage reward and the diagonal distance-weight calibration.
//! - [`planner`]: receding-horizon MCTS coverage planner with root
//!   reconciliation, reward-floor extraction and a nearest-frontier fallback.
//! - [`baselines`]: the static-range low-fidelity planner and the decoupled
//!   greedy-viewpoint planner.
//! - [`simulator`]: ground-truth grids, simulated range finder, map upkeep,
//!   closed-loop missions and maze generation.
//! - [`experiment`]: config files, seed sweeps and comparison reports used by
//!   the `covplan` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod coverage_sensor;
pub mod decision_core;
pub mod error;
pub mod experiment;
pub mod planner;
pub mod ppm;
pub mod simulator;
pub mod world_model;

pub use coverage_sensor::{
    adaptive_range, apply_mask, build_coverage_mask, coverage_probability, coverage_update,
    BinarySensor, CoverageMask, CoverageModel, Scan, SensorParams, SpaciousnessFilter,
};
pub use decision_core::{
    distance_weight, marginal_coverage, reward, transition, Direction, JointState, RewardWeights,
    RobotState,
};
pub use error::{ConfigError, IrmError, MaskError, MissionError, ParseError, SimError};
pub use planner::{
    extract_action_sequence, global_fallback, mcts, root_node, ActionSequence, CoveragePlanner,
    PlanTree, PlannerConfig,
};
pub use world_model::{Irm, IrmEdge, IrmNode, NodeId, RiskClass, WorldPoint};
