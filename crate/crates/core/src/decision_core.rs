//! MDP over joint robot-world states on the roadmap lattice.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::coverage_sensor::CoverageMask;
use crate::error::IrmError;
use crate::world_model::{Irm, NodeId, RiskClass, WorldPoint};

/// Compass direction on the lattice, used both as heading and as action.
/// North is `+row`, east is `+col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

pub type Heading = Direction;
pub type ActionDir = Direction;

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::NE,
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Self::ALL[i % 8]
    }

    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::N => (0, 1),
            Direction::NE => (1, 1),
            Direction::E => (1, 0),
            Direction::SE => (1, -1),
            Direction::S => (0, -1),
            Direction::SW => (-1, -1),
            Direction::W => (-1, 0),
            Direction::NW => (-1, 1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        self.index() % 2 == 1
    }

    /// Edge length for a lattice of cell width `w`.
    pub fn step_length(self, w: f64) -> f64 {
        if self.is_diagonal() {
            SQRT_2 * w
        } else {
            w
        }
    }

    pub fn reverse(self) -> Direction {
        Self::from_index(self.index() + 4)
    }

    /// Heading change in 45 degree increments, `0..=4`.
    pub fn turn_steps(self, other: Direction) -> usize {
        let d = (self.index() as i64 - other.index() as i64).rem_euclid(8) as usize;
        d.min(8 - d)
    }

    /// Direction of the single lattice step from `a` to `b`.
    pub fn between(a: NodeId, b: NodeId) -> Option<Direction> {
        let dx = b.col as i64 - a.col as i64;
        let dy = b.row as i64 - a.row as i64;
        Self::ALL.iter().copied().find(|d| d.offset() == (dx, dy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RobotState {
    pub node: NodeId,
    pub heading: Heading,
}

impl RobotState {
    pub const fn new(node: NodeId, heading: Heading) -> Self {
        Self { node, heading }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub robot: RobotState,
    pub world: Irm,
}

impl JointState {
    /// Rejects robots placed off the lattice or on an occupied node.
    pub fn new(robot: RobotState, world: Irm) -> Result<Self, IrmError> {
        if !world.contains(robot.node) {
            return Err(IrmError::OutOfBounds(robot.node));
        }
        if world.risk(robot.node) == RiskClass::Occupied {
            return Err(IrmError::RobotOnOccupied(robot.node));
        }
        Ok(Self { robot, world })
    }
}

/// Weights of the one-step reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub k_i: f64,
    /// Distance weight; recalibrated per mask by [`distance_weight`].
    pub k_d: f64,
    pub k_rho: f64,
    pub k_mu: f64,
    /// Coverage value of nodes with known occupancy.
    pub beta_known: f64,
    /// Coverage value of unknown nodes.
    pub beta_unknown: f64,
    /// Rotation cost for a heading change of 0, 45, 90, 135 and 180 degrees.
    pub rotation_costs: [f64; 5],
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            k_i: 1.0,
            k_d: 0.0,
            k_rho: 2.0,
            k_mu: 0.2,
            beta_known: 1.0,
            beta_unknown: 0.3,
            rotation_costs: [0.0, 0.1, 0.3, 0.6, 1.0],
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.k_i > 0.0) {
            return Err("k_i must be positive".into());
        }
        if !(self.beta_known > self.beta_unknown && self.beta_unknown >= 0.0) {
            return Err("need beta_known > beta_unknown >= 0".into());
        }
        if self.rotation_costs[0] != 0.0 || self.rotation_costs.windows(2).any(|w| w[1] < w[0]) {
            return Err("rotation costs must start at 0 and be non-decreasing".into());
        }
        if self.k_d < 0.0 || self.k_rho < 0.0 || self.k_mu < 0.0 {
            return Err("penalty weights must be non-negative".into());
        }
        Ok(())
    }

    /// Coverage value of a node. Occupied nodes are never covered by the
    /// ray-traced update, so they carry no reward.
    pub fn beta(&self, risk: RiskClass) -> f64 {
        match risk {
            RiskClass::Free => self.beta_known,
            RiskClass::Unknown => self.beta_unknown,
            RiskClass::Occupied => 0.0,
        }
    }

    pub fn rotation_cost(&self, from: Heading, to: Heading) -> f64 {
        self.rotation_costs[from.turn_steps(to)]
    }
}

/// Target of `a` from `node` when the move is allowed: in bounds and Free.
pub fn legal_target(world: &Irm, node: NodeId, a: ActionDir) -> Option<NodeId> {
    world.step(node, a).filter(|&n| world.is_free(n))
}

/// Deterministic robot dynamics. Blocked moves leave the state unchanged.
pub fn transition(s: &JointState, a: ActionDir) -> JointState {
    match legal_target(&s.world, s.robot.node, a) {
        Some(node) => JointState {
            robot: RobotState::new(node, a),
            world: s.world.clone(),
        },
        None => s.clone(),
    }
}

/// Weighted coverage gain of laying `mask` at `node` on `world`.
pub fn footprint_gain(world: &Irm, node: NodeId, mask: &CoverageMask, wts: &RewardWeights) -> f64 {
    let (cx, cy) = (node.col as i64, node.row as i64);
    let mut gain = 0.0;
    for &(dx, dy, m) in mask.entries() {
        if let Some(n) = world.node_at(cx + dx as i64, cy + dy as i64) {
            let node = world.node(n);
            if m > node.coverage {
                gain += wts.beta(node.risk) * (m - node.coverage);
            }
        }
    }
    gain
}

/// Uncertainty reduction from the masked update at the post-action node.
pub fn marginal_coverage(
    s: &JointState,
    a: ActionDir,
    mask: &CoverageMask,
    wts: &RewardWeights,
) -> f64 {
    let node = legal_target(&s.world, s.robot.node, a).unwrap_or(s.robot.node);
    footprint_gain(&s.world, node, mask, wts)
}

/// One-step reward. Blocked actions pay the distance of the attempted edge.
pub fn reward(s: &JointState, a: ActionDir, mask: &CoverageMask, wts: &RewardWeights) -> f64 {
    let w = s.world.cell_width();
    let d = a.step_length(w);
    match legal_target(&s.world, s.robot.node, a) {
        Some(target) => {
            let info = footprint_gain(&s.world, target, mask, wts);
            let rho = s.world.edge_risk(s.robot.node, a);
            wts.k_i * info
                - (wts.k_d * d + wts.k_rho * rho + wts.k_mu * wts.rotation_cost(s.robot.heading, a))
        }
        None => -wts.k_d * d,
    }
}

/// Risk-free reference state: an all-free lattice with the robot in the
/// middle and only its current footprint (the mask support) covered.
pub fn reference_state(mask: &CoverageMask, heading: Heading) -> JointState {
    let side = mask.side() + 4;
    let mut world = Irm::new(side, side, mask.cell_width(), WorldPoint::default())
        .expect("mask lattice is valid");
    let c = (side / 2) as i64;
    for idx in 0..world.len() {
        let n = world.node_from_index(idx);
        world.set_risk(n, RiskClass::Free).expect("in bounds");
    }
    for &(dx, dy, _) in mask.entries() {
        let n = world
            .node_at(c + dx as i64, c + dy as i64)
            .expect("footprint inside padded lattice");
        world.set_coverage(n, 1.0).expect("in bounds");
    }
    let robot = RobotState::new(NodeId::new(c as usize, c as usize), heading);
    JointState { robot, world }
}

/// Distance weight that makes a cardinal and a diagonal step from the
/// reference state equally rewarding:
/// `k_d = k_I (I(a_diag) - I(a_card)) / (w (sqrt 2 - 1))`.
pub fn distance_weight(mask: &CoverageMask, wts: &RewardWeights) -> f64 {
    let s0 = reference_state(mask, Direction::N);
    let cardinal = marginal_coverage(&s0, Direction::E, mask, wts);
    let diagonal = marginal_coverage(&s0, Direction::NE, mask, wts);
    wts.k_i * (diagonal - cardinal) / (mask.cell_width() * (SQRT_2 - 1.0))
}

/// Copy of `wts` with `k_d` calibrated for `mask`.
pub fn calibrated(mask: &CoverageMask, wts: &RewardWeights) -> RewardWeights {
    RewardWeights {
        k_d: distance_weight(mask, wts),
        ..*wts
    }
}
