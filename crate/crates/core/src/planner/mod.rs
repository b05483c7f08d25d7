//! Receding-horizon MCTS coverage planner.

mod episode;
mod fallback;
mod mcts;
mod root;

use serde::{Deserialize, Serialize};

use crate::decision_core::Direction;
use crate::world_model::{Irm, NodeId, WorldPoint};

pub use episode::{CoveragePlanner, EpisodeResult, EpisodeTrace, RangeMode};
pub use fallback::{frontier_nodes, global_fallback, is_frontier, shortest_paths, ShortestPaths};
pub use mcts::{extract_action_sequence, mcts, ActionStat, PlanTree, TreeNode};
pub use root::{reconcile_root, root_node, RootReconciliation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Discount factor in `(0, 1]`.
    pub discount: f64,
    /// Planning horizon in steps.
    pub max_depth: usize,
    pub max_simulations: usize,
    pub ucb_c: f64,
    /// Extraction keeps steps while their one-step reward stays above this.
    pub reward_floor: f64,
    /// Budget on accumulated `rho / d` along the reused path.
    pub rho_path_max: f64,
    /// Budget on accumulated distance along the reused path, meters.
    pub d_path_max: f64,
    /// Actions executed per planning episode.
    pub episode_period: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            discount: 0.95,
            max_depth: 15,
            max_simulations: 2000,
            ucb_c: 1.4,
            reward_floor: 0.05,
            rho_path_max: 1.0,
            d_path_max: 4.0,
            episode_period: 3,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_depth < 1 {
            return Err("max_depth must be at least 1".into());
        }
        if self.max_simulations < 1 {
            return Err("max_simulations must be at least 1".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err("discount must lie in (0, 1]".into());
        }
        if self.episode_period < 1 {
            return Err("episode_period must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: Direction,
    /// Expected one-step reward at plan time.
    pub reward: f64,
}

/// Action sequence anchored at a lattice node of the frame it was planned in.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionSequence {
    /// World position of node (0, 0) in the planning frame.
    pub origin: WorldPoint,
    pub cell_width: f64,
    pub start: NodeId,
    pub steps: Vec<Step>,
}

impl ActionSequence {
    pub fn empty_at(world: &Irm, start: NodeId) -> Self {
        Self {
            origin: world.origin(),
            cell_width: world.cell_width(),
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = Direction> + '_ {
        self.steps.iter().map(|s| s.action)
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    /// Path nodes, start included, as signed coordinates in `world`'s frame.
    pub fn path_in(&self, world: &Irm) -> Vec<(i64, i64)> {
        let (ox, oy) = if self.cell_width > 0.0 {
            world.cell_offset_to(self.origin)
        } else {
            (0, 0)
        };
        let mut cur = (self.start.col as i64 + ox, self.start.row as i64 + oy);
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(cur);
        for s in &self.steps {
            let (dx, dy) = s.action.offset();
            cur = (cur.0 + dx, cur.1 + dy);
            out.push(cur);
        }
        out
    }

    /// Total traversal distance, meters.
    pub fn length(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.action.step_length(self.cell_width))
            .sum()
    }
}
