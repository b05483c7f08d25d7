//! One planning episode: range adaptation, root reconciliation, search and
//! extraction.

use serde::{Deserialize, Serialize};

use super::{extract_action_sequence, mcts, reconcile_root, ActionSequence, PlannerConfig};
use crate::coverage_sensor::{
    adaptive_range, apply_mask, BinarySensor, CoverageMask, MaskCache, Scan, SensorParams,
    SpaciousnessFilter,
};
use crate::decision_core::{calibrated, JointState, RewardWeights};
use crate::error::MaskError;
use crate::world_model::NodeId;

/// How the planner picks the coverage range of its masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RangeMode {
    /// `alpha * r_spac` with the logistic sensor.
    Adaptive { alpha: f64 },
    /// Fixed range, with a binary sensor when `binary` is set and the
    /// logistic sensor cut at `range` otherwise.
    Static { range: f64, binary: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub episode: usize,
    pub r_spac: f64,
    /// Range of the mask actually used.
    pub r_adapt: f64,
    pub k_d: f64,
    pub root: NodeId,
    pub prefix_len: usize,
    pub simulations: usize,
    pub tree_nodes: usize,
    pub best_value: Option<f64>,
    pub extracted_len: usize,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Plan starting at the robot. Empty when the caller should fall back.
    pub sequence: ActionSequence,
    pub trace: EpisodeTrace,
}

#[derive(Debug, Clone)]
pub struct CoveragePlanner {
    pub sensor: SensorParams,
    pub weights: RewardWeights,
    pub config: PlannerConfig,
    pub mode: RangeMode,
    filter: SpaciousnessFilter,
    prev: ActionSequence,
    cache: MaskCache,
    episode: usize,
}

impl CoveragePlanner {
    pub fn new(
        sensor: SensorParams,
        weights: RewardWeights,
        config: PlannerConfig,
        mode: RangeMode,
    ) -> Self {
        Self {
            sensor,
            weights,
            config,
            mode,
            filter: SpaciousnessFilter::new(),
            prev: ActionSequence::default(),
            cache: MaskCache::default(),
            episode: 0,
        }
    }

    pub fn with_filter(mut self, filter: SpaciousnessFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn filter(&self) -> &SpaciousnessFilter {
        &self.filter
    }

    pub fn previous_plan(&self) -> &ActionSequence {
        &self.prev
    }

    /// Drop the stored plan so the next episode searches from the robot.
    pub fn reset_plan(&mut self) {
        self.prev = ActionSequence::default();
    }

    pub fn episodes(&self) -> usize {
        self.episode
    }

    /// Mask for a spaciousness estimate under the current mode.
    pub fn mask_for(&mut self, r_spac: f64, w: f64) -> Result<CoverageMask, MaskError> {
        match self.mode {
            RangeMode::Adaptive { alpha } => {
                let r = adaptive_range(r_spac, alpha, self.sensor.r_max);
                Ok(self.cache.get(r, &self.sensor, w)?.clone())
            }
            RangeMode::Static { range, binary: true } => {
                let model = BinarySensor {
                    n_rays: self.sensor.n_rays,
                    block_threshold: self.sensor.block_threshold,
                    ..BinarySensor::new(range)
                };
                Ok(self.cache.get(range, &model, w)?.clone())
            }
            RangeMode::Static { range, binary: false } => {
                Ok(self.cache.get(range, &self.sensor, w)?.clone())
            }
        }
    }

    /// Plan one episode on the robot-centred state `s` after taking `scan`.
    pub fn plan(&mut self, s: &JointState, scan: &Scan, seed: u64) -> Result<EpisodeResult, MaskError> {
        let r_spac = self.filter.update(scan);
        let mask = self.mask_for(r_spac, s.world.cell_width())?;
        let wts = calibrated(&mask, &self.weights);
        let rec = reconcile_root(&self.prev, s, &self.config);

        let mut base = s.clone();
        let mut node = s.robot.node;
        apply_mask(&mut base.world, node, &mask);
        for step in &rec.prefix {
            node = base.world.step(node, step.action).expect("prefix stays on the lattice");
            apply_mask(&mut base.world, node, &mask);
        }
        base.robot = rec.root;

        let tree = mcts(&base, &mask, &wts, &self.config, seed);
        let fresh = extract_action_sequence(&tree, &self.config);
        let fallback = fresh.is_empty();
        let sequence = if fallback {
            ActionSequence::empty_at(&s.world, s.robot.node)
        } else {
            let mut steps = rec.prefix.clone();
            steps.extend(fresh.steps.iter().copied());
            ActionSequence {
                steps,
                ..ActionSequence::empty_at(&s.world, rec.n_q)
            }
        };
        self.prev = sequence.clone();

        let trace = EpisodeTrace {
            episode: self.episode,
            r_spac,
            r_adapt: mask.r_adapt(),
            k_d: wts.k_d,
            root: rec.root.node,
            prefix_len: rec.prefix.len(),
            simulations: tree.simulations(),
            tree_nodes: tree.len(),
            best_value: tree.best_root_value(),
            extracted_len: fresh.len(),
            fallback,
        };
        self.episode += 1;
        Ok(EpisodeResult { sequence, trace })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision_core::{Direction, RobotState};
    use crate::world_model::{Irm, RiskClass, WorldPoint};

    fn open_state() -> JointState {
        let mut w = Irm::new(50, 50, 0.5, WorldPoint::default()).unwrap();
        for i in 0..w.len() {
            let n = w.node_from_index(i);
            w.set_risk(n, RiskClass::Free).unwrap();
        }
        JointState::new(RobotState::new(NodeId::new(25, 25), Direction::N), w).unwrap()
    }

    fn ring_scan(r: f64) -> Scan {
        let origin = WorldPoint::new(12.5, 12.5);
        Scan {
            origin,
            points: (0..36)
                .map(|k| {
                    let t = k as f64 * std::f64::consts::TAU / 36.0;
                    WorldPoint::new(origin.x + r * t.cos(), origin.y + r * t.sin())
                })
                .collect(),
        }
    }

    fn planner(mode: RangeMode) -> CoveragePlanner {
        let cfg = PlannerConfig {
            max_simulations: 300,
            ..PlannerConfig::default()
        };
        CoveragePlanner::new(SensorParams::default(), RewardWeights::default(), cfg, mode)
    }

    #[test]
    fn first_episode_starts_at_robot() {
        let s = open_state();
        let mut p = planner(RangeMode::Adaptive { alpha: 2.0 });
        let out = p.plan(&s, &ring_scan(6.0), 1).unwrap();
        assert_eq!(out.trace.root, s.robot.node);
        assert_eq!(out.trace.prefix_len, 0);
        assert!((out.trace.r_adapt - 8.0).abs() < 1e-12);
        assert!(!out.sequence.is_empty());
        assert_eq!(out.sequence.start, s.robot.node);
    }

    #[test]
    fn static_mode_ignores_spaciousness() {
        let s = open_state();
        let mut p = planner(RangeMode::Static { range: 4.0, binary: true });
        let out = p.plan(&s, &ring_scan(1.0), 1).unwrap();
        assert_eq!(out.trace.r_adapt, 4.0);
    }

    #[test]
    fn covered_world_requests_fallback() {
        let mut s = open_state();
        for i in 0..s.world.len() {
            let n = s.world.node_from_index(i);
            s.world.set_coverage(n, 1.0).unwrap();
        }
        let mut p = planner(RangeMode::Adaptive { alpha: 0.5 });
        let out = p.plan(&s, &ring_scan(6.0), 1).unwrap();
        assert!(out.trace.fallback);
        assert!(out.sequence.is_empty());
        assert!(p.previous_plan().is_empty());
    }
}
