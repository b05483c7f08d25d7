//! Comparison planners: the static-range low-fidelity rollout planner and the
//! decoupled greedy-viewpoint planner.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::coverage_sensor::{coverage_update, BinarySensor, CoverageModel, SensorParams};
use crate::decision_core::{JointState, RewardWeights};
use crate::planner::{
    shortest_paths, ActionSequence, CoveragePlanner, PlannerConfig, RangeMode, ShortestPaths, Step,
};
use crate::world_model::{Irm, NodeId};

/// Settings of the low-fidelity planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfConfig {
    pub static_range: f64,
    /// Coverage probability 1 inside the range and 0 outside.
    pub deterministic_mask: bool,
}

impl LfConfig {
    pub fn lf4() -> Self {
        Self {
            static_range: 4.0,
            deterministic_mask: true,
        }
    }

    pub fn lf8() -> Self {
        Self {
            static_range: 8.0,
            deterministic_mask: true,
        }
    }

    /// The sensor an LF robot believes it carries.
    pub fn sensor_model(&self, params: &SensorParams) -> BinarySensor {
        BinarySensor {
            n_rays: params.n_rays,
            block_threshold: params.block_threshold,
            ..BinarySensor::new(self.static_range)
        }
    }

    /// The static range must fit in half the planning window.
    pub fn validate(&self, window_width: usize, cell_width: f64) -> Result<(), String> {
        let half = window_width as f64 * cell_width / 2.0;
        if !(self.static_range > 0.0) || self.static_range > half {
            return Err(format!(
                "static range {} outside (0, {half}]",
                self.static_range
            ));
        }
        Ok(())
    }
}

/// The rollout planner with a fixed-range mask; spaciousness is still
/// tracked but never changes the mask.
pub fn lf_planner(
    lf: LfConfig,
    sensor: SensorParams,
    weights: RewardWeights,
    config: PlannerConfig,
) -> CoveragePlanner {
    let mode = RangeMode::Static {
        range: lf.static_range,
        binary: lf.deterministic_mask,
    };
    CoveragePlanner::new(sensor, weights, config, mode)
}

/// Viewpoints in selection order with their marginal reward when picked.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewpointSet {
    pub viewpoints: Vec<(NodeId, f64)>,
}

impl ViewpointSet {
    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.viewpoints.iter().map(|v| v.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoupledConfig {
    /// Tour length limit, meters of path cost.
    pub budget: f64,
    /// Candidate subgrid stride in cells.
    pub stride: usize,
    /// Selection stops once the best marginal reward drops below this.
    pub reward_floor: f64,
    pub k_rho: f64,
}

impl Default for DecoupledConfig {
    fn default() -> Self {
        Self {
            budget: 15.0,
            stride: 2,
            reward_floor: 0.05,
            k_rho: RewardWeights::default().k_rho,
        }
    }
}

/// Free nodes on the stride subgrid that the robot can reach.
pub fn candidate_viewpoints(world: &Irm, from_robot: &ShortestPaths, stride: usize) -> Vec<NodeId> {
    let stride = stride.max(1);
    (0..world.len())
        .map(|i| world.node_from_index(i))
        .filter(|n| n.col % stride == 0 && n.row % stride == 0)
        .filter(|&n| world.is_free(n) && from_robot.reachable(n))
        .collect()
}

/// Ray-traced coverage a sensor at `node` would produce on an otherwise
/// uncovered copy of `world`, as `(index, probability)` pairs.
pub fn viewpoint_footprint<M: CoverageModel + ?Sized>(
    world: &Irm,
    node: NodeId,
    model: &M,
) -> Vec<(usize, f64)> {
    let mut blank = world.clone();
    for i in 0..blank.len() {
        *blank.coverage_at_index_mut(i) = 0.0;
    }
    coverage_update(&mut blank, node, model).expect("candidate in bounds");
    blank
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.coverage > 0.0)
        .map(|(i, n)| (i, n.coverage))
        .collect()
}

fn gain(world: &Irm, cov: &[f64], fp: &[(usize, f64)], wts: &RewardWeights) -> f64 {
    fp.iter()
        .filter(|(i, p)| *p > cov[*i])
        .map(|&(i, p)| wts.beta(world.nodes()[i].risk) * (p - cov[i]))
        .sum()
}

/// Open tour from `start` through `stops`: nearest neighbour then 2-opt.
/// Returns the visiting order (indices into `stops`) and its cost.
fn order_tour(cost: &dyn Fn(usize, usize) -> f64, n: usize) -> (Vec<usize>, f64) {
    // node 0 is the start, stops are 1..=n
    let mut order = vec![0];
    let mut left: Vec<usize> = (1..=n).collect();
    while !left.is_empty() {
        let last = *order.last().expect("non-empty");
        let (k, _) = left
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, cost(last, j)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        order.push(left.remove(k));
    }
    let total = |o: &[usize]| o.windows(2).map(|w| cost(w[0], w[1])).sum::<f64>();
    let mut best = total(&order);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 1..order.len() {
            for j in i + 1..order.len() {
                order[i..=j].reverse();
                let c = total(&order);
                if c + 1e-12 < best {
                    best = c;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
    }
    (order[1..].iter().map(|&k| k - 1).collect(), best)
}

/// Greedy viewpoint selection, then a tour and the lattice path through it.
pub struct DecoupledPlan {
    pub viewpoints: ViewpointSet,
    /// Visiting order as indices into `viewpoints`.
    pub order: Vec<usize>,
    pub tour_cost: f64,
    pub sequence: ActionSequence,
}

/// Plan with the decoupled pipeline. Returns an empty sequence when there
/// are no candidates or nothing worth covering.
pub fn decoupled_plan(
    s: &JointState,
    sensor: &SensorParams,
    wts: &RewardWeights,
    cfg: &DecoupledConfig,
) -> DecoupledPlan {
    let world = &s.world;
    let start = s.robot.node;
    let mut trees: HashMap<NodeId, ShortestPaths> = HashMap::new();
    trees.insert(start, shortest_paths(world, start, cfg.k_rho));
    let candidates = candidate_viewpoints(world, &trees[&start], cfg.stride);
    let footprints: Vec<Vec<(usize, f64)>> = candidates
        .iter()
        .map(|&n| viewpoint_footprint(world, n, sensor))
        .collect();

    let mut cov: Vec<f64> = world.nodes().iter().map(|n| n.coverage).collect();
    let mut taken = vec![false; candidates.len()];
    let mut picked: Vec<usize> = Vec::new();
    let mut set = ViewpointSet::default();
    let mut order = Vec::new();
    let mut tour_cost = 0.0;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (k, fp) in footprints.iter().enumerate() {
            if taken[k] {
                continue;
            }
            let g = gain(world, &cov, fp, wts);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((k, g));
            }
        }
        let Some((k, g)) = best else { break };
        if g < cfg.reward_floor {
            break;
        }
        let node = candidates[k];
        trees
            .entry(node)
            .or_insert_with(|| shortest_paths(world, node, cfg.k_rho));
        let mut stops = picked.clone();
        stops.push(k);
        let ids: Vec<NodeId> = std::iter::once(start)
            .chain(stops.iter().map(|&i| candidates[i]))
            .collect();
        let cost = |a: usize, b: usize| trees[&ids[a]].cost(ids[b]);
        let (o, c) = order_tour(&cost, stops.len());
        if c > cfg.budget && !picked.is_empty() {
            break;
        }
        taken[k] = true;
        for &(i, p) in &footprints[k] {
            if p > cov[i] {
                cov[i] = p;
            }
        }
        picked.push(k);
        set.viewpoints.push((node, g));
        order = o;
        tour_cost = c;
        if c > cfg.budget {
            break;
        }
    }

    let mut steps = Vec::new();
    let mut at = start;
    for &i in &order {
        let (node, g) = set.viewpoints[i];
        let actions = trees[&at].actions_to(node).unwrap_or_default();
        let n = actions.len();
        for (j, action) in actions.into_iter().enumerate() {
            let reward = if j + 1 == n { g } else { 0.0 };
            steps.push(Step { action, reward });
        }
        at = node;
    }
    DecoupledPlan {
        viewpoints: set,
        order,
        tour_cost,
        sequence: ActionSequence {
            steps,
            ..ActionSequence::empty_at(world, start)
        },
    }
}

/// Action sequence of [`decoupled_plan`].
pub fn decoupled_planner(
    s: &JointState,
    sensor: &SensorParams,
    wts: &RewardWeights,
    cfg: &DecoupledConfig,
) -> ActionSequence {
    decoupled_plan(s, sensor, wts, cfg).sequence
}
