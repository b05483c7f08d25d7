//! UCB1 tree search over action sequences with mask-based rollouts.
//!
//! Transitions are deterministic, so a tree node is identified by the action
//! sequence that reaches it. The coverage map a node sees is rebuilt on a
//! scratch buffer by replaying masks along the path from the root, which keeps
//! the caller's world untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionSequence, PlannerConfig, Step};
use crate::coverage_sensor::CoverageMask;
use crate::decision_core::{Direction, JointState, RewardWeights, RobotState};
use crate::world_model::{Irm, NodeId, RiskClass, WorldPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct ActionStat {
    pub action: Direction,
    pub target: RobotState,
    pub visits: u32,
    /// Mean discounted return of simulations through this action.
    pub q: f64,
    /// Deterministic one-step reward; valid once the action has been tried.
    pub reward: f64,
    pub child: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub state: RobotState,
    pub depth: usize,
    pub visits: u32,
    /// Legal (non-blocked) actions in N..NW order.
    pub actions: Vec<ActionStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanTree {
    nodes: Vec<TreeNode>,
    origin: WorldPoint,
    cell_width: f64,
    max_depth: usize,
    simulations: usize,
}

impl PlanTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn simulations(&self) -> usize {
        self.simulations
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Deepest node depth reached so far.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Highest `Q` among visited root actions.
    pub fn best_root_value(&self) -> Option<f64> {
        self.root()
            .actions
            .iter()
            .filter(|a| a.visits > 0)
            .map(|a| a.q)
            .fold(None, |acc, q| Some(acc.map_or(q, |b: f64| b.max(q))))
    }

    /// Greedy max-`Q` path from the root without any reward cropping.
    pub fn greedy_steps(&self) -> Vec<Step> {
        let mut steps = Vec::new();
        let mut idx = 0;
        while steps.len() < self.max_depth {
            let node = &self.nodes[idx];
            let mut best: Option<&ActionStat> = None;
            for a in node.actions.iter().filter(|a| a.visits > 0) {
                if best.is_none_or(|b| a.q > b.q) {
                    best = Some(a);
                }
            }
            let Some(best) = best else { break };
            steps.push(Step {
                action: best.action,
                reward: best.reward,
            });
            match best.child {
                Some(c) => idx = c,
                None => break,
            }
        }
        steps
    }
}

/// Per-search view of the world: flat arrays for the hot loop.
struct SearchWorld<'a> {
    world: &'a Irm,
    width: i64,
    height: i64,
    free: Vec<bool>,
    beta: Vec<f64>,
    /// Mask rows as `(dy, dx_first, values)`.
    rows: Vec<(i64, i64, Vec<f64>)>,
    wts: &'a RewardWeights,
}

impl<'a> SearchWorld<'a> {
    fn new(world: &'a Irm, mask: &CoverageMask, wts: &'a RewardWeights) -> Self {
        let free = world.nodes().iter().map(|n| n.risk == RiskClass::Free).collect();
        let beta = world.nodes().iter().map(|n| wts.beta(n.risk)).collect();
        let r = mask.radius() as i64;
        let mut rows = Vec::new();
        for dy in -r..=r {
            let vals: Vec<(i64, f64)> = (-r..=r)
                .map(|dx| (dx, mask.value(dx, dy)))
                .filter(|(_, v)| *v > 0.0)
                .collect();
            if let (Some(first), Some(last)) = (vals.first(), vals.last()) {
                let (lo, hi) = (first.0, last.0);
                rows.push((dy, lo, (lo..=hi).map(|dx| mask.value(dx, dy)).collect()));
            }
        }
        Self {
            world,
            width: world.width() as i64,
            height: world.height() as i64,
            free,
            beta,
            rows,
            wts,
        }
    }

    fn legal(&self, node: NodeId, a: Direction) -> Option<NodeId> {
        let (dx, dy) = a.offset();
        let (x, y) = (node.col as i64 + dx, node.row as i64 + dy);
        if x < 0 || y < 0 || x >= self.width || y >= self.height {
            return None;
        }
        let idx = (y * self.width + x) as usize;
        self.free[idx].then(|| NodeId::new(x as usize, y as usize))
    }

    fn legal_actions(&self, state: RobotState) -> Vec<ActionStat> {
        Direction::ALL
            .iter()
            .filter_map(|&a| {
                self.legal(state.node, a).map(|n| ActionStat {
                    action: a,
                    target: RobotState::new(n, a),
                    visits: 0,
                    q: 0.0,
                    reward: 0.0,
                    child: None,
                })
            })
            .collect()
    }

    /// Lay the mask at `node` on `cov`, returning the weighted gain.
    fn apply(&self, cov: &mut [f64], node: NodeId) -> f64 {
        let (cx, cy) = (node.col as i64, node.row as i64);
        let mut gain = 0.0;
        for (dy, lo, vals) in &self.rows {
            let y = cy + dy;
            if y < 0 || y >= self.height {
                continue;
            }
            let x0 = cx + lo;
            let start = (-x0).max(0) as usize;
            let end = vals.len().min((self.width - x0).max(0) as usize);
            if start >= end {
                continue;
            }
            let base = (y * self.width + x0 + start as i64) as usize;
            for (k, &m) in vals[start..end].iter().enumerate() {
                let idx = base + k;
                let p = cov[idx];
                if m > p {
                    gain += self.beta[idx] * (m - p);
                    cov[idx] = m;
                }
            }
        }
        gain
    }

    /// Apply the move `from --a--> to` on `cov` and return its reward.
    fn step_reward(&self, cov: &mut [f64], from: RobotState, a: Direction, to: NodeId) -> f64 {
        let info = self.apply(cov, to);
        let w = self.world.cell_width();
        let rho = self.world.edge_risk(from.node, a);
        self.wts.k_i * info
            - (self.wts.k_d * a.step_length(w)
                + self.wts.k_rho * rho
                + self.wts.k_mu * self.wts.rotation_cost(from.heading, a))
    }
}

/// Build a lookahead tree from `s` with exactly `cfg.max_simulations` simulations.
///
/// `wts.k_d` is used as given; callers calibrate it for `mask` beforehand.
pub fn mcts(
    s: &JointState,
    mask: &CoverageMask,
    wts: &RewardWeights,
    cfg: &PlannerConfig,
    seed: u64,
) -> PlanTree {
    let sw = SearchWorld::new(&s.world, mask, wts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root_cov: Vec<f64> = s.world.nodes().iter().map(|n| n.coverage).collect();
    let mut scratch = root_cov.clone();
    let mut tree = PlanTree {
        nodes: vec![TreeNode {
            state: s.robot,
            depth: 0,
            visits: 0,
            actions: sw.legal_actions(s.robot),
        }],
        origin: s.world.origin(),
        cell_width: s.world.cell_width(),
        max_depth: cfg.max_depth,
        simulations: 0,
    };
    let mut path: Vec<(usize, usize)> = Vec::with_capacity(cfg.max_depth);
    let mut legal_buf: Vec<Direction> = Vec::with_capacity(8);
    // range of backed-up returns, used to put Q on a unit scale for UCB1
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);

    for _ in 0..cfg.max_simulations {
        scratch.copy_from_slice(&root_cov);
        path.clear();
        let mut idx = 0;

        // selection and expansion
        loop {
            let node = &tree.nodes[idx];
            if node.depth >= cfg.max_depth || node.actions.is_empty() {
                break;
            }
            if let Some(ai) = node.actions.iter().position(|a| a.child.is_none()) {
                let (state, depth) = (node.state, node.depth);
                let stat = &node.actions[ai];
                let (action, target) = (stat.action, stat.target);
                let r = sw.step_reward(&mut scratch, state, action, target.node);
                let child = tree.nodes.len();
                tree.nodes.push(TreeNode {
                    state: target,
                    depth: depth + 1,
                    visits: 0,
                    actions: sw.legal_actions(target),
                });
                let stat = &mut tree.nodes[idx].actions[ai];
                stat.reward = r;
                stat.child = Some(child);
                path.push((idx, ai));
                idx = child;
                break;
            }
            let ln_n = (node.visits.max(1) as f64).ln();
            let span = if hi > lo { hi - lo } else { 1.0 };
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, a) in node.actions.iter().enumerate() {
                let q = if hi > lo { (a.q - lo) / span } else { 0.0 };
                let score = q + cfg.ucb_c * (ln_n / a.visits as f64).sqrt();
                if score > best_score {
                    best_score = score;
                    best = i;
                }
            }
            let stat = &node.actions[best];
            sw.apply(&mut scratch, stat.target.node);
            path.push((idx, best));
            idx = stat.child.expect("expanded");
        }

        // random rollout to the horizon
        let leaf = &tree.nodes[idx];
        let mut state = leaf.state;
        let mut rollout = 0.0;
        let mut scale = 1.0;
        for _ in leaf.depth..cfg.max_depth {
            legal_buf.clear();
            let back = state.heading.reverse();
            for a in Direction::ALL {
                if a != back && sw.legal(state.node, a).is_some() {
                    legal_buf.push(a);
                }
            }
            if legal_buf.is_empty() {
                if sw.legal(state.node, back).is_some() {
                    legal_buf.push(back);
                } else {
                    break;
                }
            }
            let a = legal_buf[rng.random_range(0..legal_buf.len())];
            let to = sw.legal(state.node, a).expect("legal");
            rollout += scale * sw.step_reward(&mut scratch, state, a, to);
            scale *= cfg.discount;
            state = RobotState::new(to, a);
        }

        // discounted backup
        let mut ret = rollout;
        for &(n, ai) in path.iter().rev() {
            let node = &mut tree.nodes[n];
            node.visits += 1;
            let stat = &mut node.actions[ai];
            ret = stat.reward + cfg.discount * ret;
            stat.visits += 1;
            stat.q += (ret - stat.q) / stat.visits as f64;
            lo = lo.min(ret);
            hi = hi.max(ret);
        }
        if path.is_empty() {
            tree.nodes[0].visits += 1;
        }
        tree.simulations += 1;
    }
    tree
}

/// Follow max-`Q` actions from the root and crop at the first step whose
/// one-step reward does not exceed `cfg.reward_floor`.
pub fn extract_action_sequence(tree: &PlanTree, cfg: &PlannerConfig) -> ActionSequence {
    let mut steps = tree.greedy_steps();
    steps.truncate(cfg.max_depth);
    if let Some(cut) = steps.iter().position(|s| !(s.reward > cfg.reward_floor)) {
        steps.truncate(cut);
    }
    ActionSequence {
        origin: tree.origin,
        cell_width: tree.cell_width,
        start: tree.root().state.node,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage_sensor::{apply_mask, build_coverage_mask, SensorParams};
    use crate::decision_core::{reward, transition};

    fn open_world(side: usize, cell: f64) -> Irm {
        let mut w = Irm::new(side, side, cell, WorldPoint::default()).unwrap();
        for i in 0..w.len() {
            let n = w.node_from_index(i);
            w.set_risk(n, RiskClass::Free).unwrap();
        }
        w
    }

    fn tree_with_rewards(rewards: &[f64]) -> PlanTree {
        let mut nodes = Vec::new();
        for (i, &r) in rewards.iter().enumerate() {
            nodes.push(TreeNode {
                state: RobotState::new(NodeId::new(i, 0), Direction::E),
                depth: i,
                visits: 1,
                actions: vec![ActionStat {
                    action: Direction::E,
                    target: RobotState::new(NodeId::new(i + 1, 0), Direction::E),
                    visits: 1,
                    q: 1.0,
                    reward: r,
                    child: Some(i + 1),
                }],
            });
        }
        nodes.push(TreeNode {
            state: RobotState::new(NodeId::new(rewards.len(), 0), Direction::E),
            depth: rewards.len(),
            visits: 0,
            actions: vec![],
        });
        PlanTree {
            nodes,
            origin: WorldPoint::default(),
            cell_width: 1.0,
            max_depth: rewards.len(),
            simulations: 1,
        }
    }

    #[test]
    fn extraction_crops_at_first_low_reward() {
        let cfg = PlannerConfig {
            reward_floor: 0.1,
            max_depth: 4,
            ..PlannerConfig::default()
        };
        assert_eq!(extract_action_sequence(&tree_with_rewards(&[5.0, 3.0, 0.01, 4.0]), &cfg).len(), 2);
        assert_eq!(extract_action_sequence(&tree_with_rewards(&[5.0, 3.0, 1.0, 4.0]), &cfg).len(), 4);
        assert!(extract_action_sequence(&tree_with_rewards(&[0.05, 3.0, 1.0, 4.0]), &cfg).is_empty());
    }

    #[test]
    fn single_simulation_anatomy() {
        let world = open_world(9, 0.5);
        let s = JointState::new(RobotState::new(NodeId::new(4, 4), Direction::N), world).unwrap();
        let mask = build_coverage_mask(1.5, &SensorParams::default(), 0.5).unwrap();
        let cfg = PlannerConfig {
            max_simulations: 1,
            max_depth: 5,
            ..PlannerConfig::default()
        };
        let tree = mcts(&s, &mask, &RewardWeights::default(), &cfg, 1);
        assert_eq!(tree.len(), 2);
        assert_eq!(tree.root().visits, 1);
        assert_eq!(tree.simulations(), 1);
    }

    #[test]
    fn search_is_deterministic_and_pure() {
        let mut world = open_world(15, 0.5);
        world.set_risk(NodeId::new(9, 7), RiskClass::Occupied).unwrap();
        let s = JointState::new(RobotState::new(NodeId::new(7, 7), Direction::N), world).unwrap();
        let before = s.clone();
        let mask = build_coverage_mask(2.0, &SensorParams::default(), 0.5).unwrap();
        let cfg = PlannerConfig {
            max_simulations: 300,
            max_depth: 6,
            ..PlannerConfig::default()
        };
        let a = mcts(&s, &mask, &RewardWeights::default(), &cfg, 42);
        let b = mcts(&s, &mask, &RewardWeights::default(), &cfg, 42);
        assert_eq!(a, b);
        assert_eq!(s, before);
        assert!(a.depth() <= cfg.max_depth);
        assert!(a.nodes().iter().all(|n| n.actions.iter().all(|x| x.q.is_finite())));
    }

    #[test]
    fn boxed_in_robot_has_no_actions() {
        let mut world = Irm::new(3, 3, 0.5, WorldPoint::default()).unwrap();
        world.set_risk(NodeId::new(1, 1), RiskClass::Free).unwrap();
        for i in 0..9 {
            let n = world.node_from_index(i);
            if n != NodeId::new(1, 1) {
                world.set_risk(n, RiskClass::Occupied).unwrap();
            }
        }
        let s = JointState::new(RobotState::new(NodeId::new(1, 1), Direction::N), world).unwrap();
        let mask = build_coverage_mask(1.0, &SensorParams::default(), 0.5).unwrap();
        let tree = mcts(&s, &mask, &RewardWeights::default(), &PlannerConfig::default(), 3);
        assert_eq!(tree.len(), 1);
        assert!(extract_action_sequence(&tree, &PlannerConfig::default()).is_empty());
    }

    #[test]
    fn stored_rewards_match_reference_reward() {
        // each tree edge reward equals the reward of replaying its path
        let world = open_world(11, 0.5);
        let s = JointState::new(RobotState::new(NodeId::new(5, 5), Direction::N), world).unwrap();
        let mask = build_coverage_mask(1.5, &SensorParams::default(), 0.5).unwrap();
        let wts = RewardWeights {
            k_d: 0.7,
            ..RewardWeights::default()
        };
        let cfg = PlannerConfig {
            max_simulations: 200,
            max_depth: 3,
            ..PlannerConfig::default()
        };
        let tree = mcts(&s, &mask, &wts, &cfg, 9);
        let steps = tree.greedy_steps();
        let mut cur = s.clone();
        for st in &steps {
            let r = reward(&cur, st.action, &mask, &wts);
            assert!((r - st.reward).abs() < 1e-9);
            cur = transition(&cur, st.action);
            let node = cur.robot.node;
            apply_mask(&mut cur.world, node, &mask);
        }
    }
}
