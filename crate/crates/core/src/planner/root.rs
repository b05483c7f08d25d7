//! Choosing where the next search starts along the previous plan.

use super::{ActionSequence, PlannerConfig, Step};
use crate::decision_core::{JointState, RobotState};
use crate::world_model::NodeId;

/// Where a new search starts and the part of the old plan that leads there.
#[derive(Debug, Clone, PartialEq)]
pub struct RootReconciliation {
    pub root: RobotState,
    /// Node of the previous plan closest to the robot.
    pub n_q: NodeId,
    /// Steps of the previous plan from `n_q` to `root`.
    pub prefix: Vec<Step>,
}

/// Root of the next tree.
pub fn root_node(prev: &ActionSequence, s: &JointState, cfg: &PlannerConfig) -> RobotState {
    reconcile_root(prev, s, cfg).root
}

/// Walk the previous plan from the node closest to the robot and stop at the
/// start of the first edge that is no longer traversable or pushes the
/// accumulated risk or distance over budget. Without a violation the root is
/// the last node of the plan.
///
/// The robot itself is the root when there is no previous plan or when it is
/// no longer standing on it.
pub fn reconcile_root(prev: &ActionSequence, s: &JointState, cfg: &PlannerConfig) -> RootReconciliation {
    let here = RootReconciliation {
        root: s.robot,
        n_q: s.robot.node,
        prefix: Vec::new(),
    };
    if prev.is_empty() {
        return here;
    }
    let path = prev.path_in(&s.world);
    let (rc, rr) = (s.robot.node.col as i64, s.robot.node.row as i64);
    let mut q = 0;
    let mut best = i64::MAX;
    for (i, &(c, r)) in path.iter().enumerate() {
        let d2 = (c - rc).pow(2) + (r - rr).pow(2);
        if d2 < best {
            best = d2;
            q = i;
        }
    }
    if best != 0 {
        return here;
    }

    let w = s.world.cell_width();
    let mut rho_sum = 0.0;
    let mut d_sum = 0.0;
    let mut end = path.len() - 1;
    for i in q..path.len() - 1 {
        let action = prev.steps[i].action;
        let from = s.world.node_at(path[i].0, path[i].1);
        let to = s.world.node_at(path[i + 1].0, path[i + 1].1);
        let ok = match (from, to) {
            (Some(a), Some(b)) if s.world.is_free(b) => {
                let d = action.step_length(w);
                rho_sum += s.world.edge_risk(a, action) / d;
                d_sum += d;
                rho_sum <= cfg.rho_path_max && d_sum <= cfg.d_path_max
            }
            _ => false,
        };
        if !ok {
            end = i;
            break;
        }
    }

    let prefix = prev.steps[q..end].to_vec();
    let heading = prefix.last().map_or(s.robot.heading, |st: &Step| st.action);
    let (c, r) = path[end];
    RootReconciliation {
        root: RobotState::new(NodeId::new(c as usize, r as usize), heading),
        n_q: s.robot.node,
        prefix,
    }
}
