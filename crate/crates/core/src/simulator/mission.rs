//! Closed-loop missions: sense, plan, execute, log.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sense_in_place, GroundTruthGrid, Injection};
use crate::baselines::{decoupled_planner, lf_planner, DecoupledConfig, LfConfig};
use crate::coverage_sensor::{Scan, SensorParams};
use crate::decision_core::{Direction, JointState, RewardWeights, RobotState};
use crate::error::MissionError;
use crate::planner::{
    global_fallback, is_frontier, CoveragePlanner, EpisodeTrace, PlannerConfig,
    RangeMode,
};
use crate::world_model::{Irm, NodeId, RiskClass, WorldPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Adaptive,
    Lf4,
    Lf8,
    Decoupled,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Adaptive,
        PlannerKind::Lf4,
        PlannerKind::Lf8,
        PlannerKind::Decoupled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Adaptive => "adaptive",
            PlannerKind::Lf4 => "lf4",
            PlannerKind::Lf8 => "lf8",
            PlannerKind::Decoupled => "decoupled",
        }
    }

    pub fn lf_config(self) -> Option<LfConfig> {
        match self {
            PlannerKind::Lf4 => Some(LfConfig::lf4()),
            PlannerKind::Lf8 => Some(LfConfig::lf8()),
            _ => None,
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner `{s}` (expected adaptive, lf4, lf8 or decoupled)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    pub sensor: SensorParams,
    pub weights: RewardWeights,
    pub planner: PlannerConfig,
    /// Adaptive range scale.
    pub alpha: f64,
    /// Side of the robot-centred planning window, cells.
    pub window: usize,
    pub step_limit: usize,
    /// Radius of the covered-area metric, meters.
    pub metric_radius: f64,
    pub decoupled: DecoupledConfig,
    /// Check map and pose invariants after every step.
    pub check_invariants: bool,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            sensor: SensorParams::default(),
            weights: RewardWeights::default(),
            planner: PlannerConfig::default(),
            alpha: 2.0,
            window: 50,
            step_limit: 2000,
            metric_radius: 8.0,
            decoupled: DecoupledConfig::default(),
            check_invariants: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub path_m: f64,
    pub covered_m2: f64,
    pub episode: usize,
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepLimit,
    /// No reachable frontier remained.
    Complete,
    /// Several episodes in a row produced no motion.
    Stalled,
}

/// One planning episode as seen by the mission loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub step: usize,
    pub planning_ms: f64,
    pub fallback: bool,
    pub executed: usize,
    pub trace: Option<EpisodeTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionLog {
    pub planner: PlannerKind,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub episodes: Vec<EpisodeRecord>,
    /// Sum of ground-truth risk over executed edges.
    pub risk_sum: f64,
    pub termination: Termination,
    /// Every pose the robot occupied, as grid cells.
    pub visited: Vec<(usize, usize)>,
    pub final_map: Irm,
}

impl MissionLog {
    pub const CSV_HEADER: &'static str = "step,x,y,path_m,covered_m2,episode,fallback";

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("a mission logs at least its start")
    }

    pub fn steps(&self) -> usize {
        self.last().step
    }

    pub fn path_length(&self) -> f64 {
        self.last().path_m
    }

    pub fn covered_area(&self) -> f64 {
        self.last().covered_m2
    }

    pub fn mean_planning_ms(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(|e| e.planning_ms).sum::<f64>() / self.episodes.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.records.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.3},{:.3},{:.6},{:.6},{},{}\n",
                r.step,
                r.x,
                r.y,
                r.path_m,
                r.covered_m2,
                r.episode,
                u8::from(r.fallback)
            ));
        }
        out
    }

    /// Episode records as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        self.episodes
            .iter()
            .map(|e| serde_json::to_string(e).expect("serializable") + "\n")
            .collect()
    }
}

enum Brain {
    Rollout(Box<CoveragePlanner>),
    Decoupled,
}

struct Mission<'a> {
    grid: &'a GroundTruthGrid,
    cfg: &'a MissionConfig,
    map: Irm,
    spurious: Vec<bool>,
    node: NodeId,
    heading: Direction,
    step: usize,
    path: f64,
    risk_sum: f64,
    seen: Vec<bool>,
    covered_cells: usize,
    records: Vec<StepRecord>,
    visited: Vec<(usize, usize)>,
    episode: usize,
    fallback: bool,
    scan: Scan,
    bumps: usize,
}

impl Mission<'_> {
    fn pose(&self) -> WorldPoint {
        self.grid.cell_center(self.node.col, self.node.row)
    }

    fn sense(&mut self) -> Result<(), MissionError> {
        let pose = self.pose();
        self.scan = sense_in_place(&mut self.map, pose, self.grid, &self.cfg.sensor, self.cfg.sensor.r_max)?;
        // injected false openings persist until the robot runs into them
        for i in 0..self.spurious.len() {
            if self.spurious[i] && self.map.nodes()[i].risk != RiskClass::Free {
                let n = self.map.node_from_index(i);
                self.map.set_risk(n, RiskClass::Free)?;
            }
        }
        let w = self.grid.cell_width();
        let reach = (self.cfg.metric_radius / w).floor() as i64;
        let (c0, r0) = (self.node.col as i64, self.node.row as i64);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (c, r) = (c0 + dx, r0 + dy);
                if self.grid.is_occupied(c, r) {
                    continue;
                }
                if w * (dx as f64).hypot(dy as f64) <= self.cfg.metric_radius + 1e-9 {
                    let i = r as usize * self.grid.width() + c as usize;
                    if !self.seen[i] {
                        self.seen[i] = true;
                        self.covered_cells += 1;
                    }
                }
            }
        }
        if self.cfg.check_invariants {
            self.check()?;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), MissionError> {
        let fail = |message: String| MissionError::Invariant {
            step: self.step,
            message,
        };
        if self.grid.is_occupied(self.node.col as i64, self.node.row as i64) {
            return Err(fail(format!("robot inside a wall at {}", self.node)));
        }
        for (i, n) in self.map.nodes().iter().enumerate() {
            if n.risk == RiskClass::Free && !self.spurious[i] {
                let id = self.map.node_from_index(i);
                if self.grid.is_occupied(id.col as i64, id.row as i64) {
                    return Err(fail(format!("map marks wall cell {id} Free")));
                }
            }
        }
        if let Some(prev) = self.records.last() {
            let area = self.area();
            if area < prev.covered_m2 || self.path < prev.path_m {
                return Err(fail("metrics decreased".into()));
            }
        }
        Ok(())
    }

    fn area(&self) -> f64 {
        let w = self.grid.cell_width();
        self.covered_cells as f64 * w * w
    }

    fn record(&mut self) {
        let p = self.pose();
        self.records.push(StepRecord {
            step: self.step,
            x: p.x,
            y: p.y,
            path_m: self.path,
            covered_m2: self.area(),
            episode: self.episode,
            fallback: self.fallback,
        });
        self.visited.push((self.node.col, self.node.row));
    }

    /// Try one lattice step. Returns false when the move is refused.
    fn advance(&mut self, next: (i64, i64)) -> Result<bool, MissionError> {
        let Some(target) = self.map.node_at(next.0, next.1) else {
            return Ok(false);
        };
        let Some(dir) = Direction::between(self.node, target) else {
            return Ok(false);
        };
        if self.grid.is_occupied(next.0, next.1) {
            // bumped into something the map got wrong
            self.map.set_risk(target, RiskClass::Occupied)?;
            let i = self.map.index(target);
            self.spurious[i] = false;
            self.bumps += 1;
            return Ok(false);
        }
        if !self.map.is_free(target) {
            return Ok(false);
        }
        let from = (self.node.col as i64, self.node.row as i64);
        self.risk_sum += self.grid.edge_risk(from, next);
        self.path += dir.step_length(self.grid.cell_width());
        self.node = target;
        self.heading = dir;
        self.step += 1;
        self.sense()?;
        self.record();
        Ok(true)
    }

    fn joint(&self, world: Irm, node: NodeId) -> Result<JointState, MissionError> {
        Ok(JointState::new(RobotState::new(node, self.heading), world)?)
    }
}

/// Run one mission and return its log.
pub fn run_mission(
    grid: &GroundTruthGrid,
    kind: PlannerKind,
    cfg: &MissionConfig,
    seed: u64,
) -> Result<MissionLog, MissionError> {
    run_mission_with(grid, kind, cfg, seed, None, &mut |_, _| {})
}

/// [`run_mission`] with optional map injections and an observer that sees
/// the map after every step.
pub fn run_mission_with(
    grid: &GroundTruthGrid,
    kind: PlannerKind,
    cfg: &MissionConfig,
    seed: u64,
    injection: Option<&Injection>,
    observer: &mut dyn FnMut(usize, &Irm),
) -> Result<MissionLog, MissionError> {
    let w = grid.cell_width();
    let mut map = Irm::new(grid.width(), grid.height(), w, WorldPoint::default())?;
    let mut spurious = vec![false; map.len()];
    if let Some(inj) = injection {
        for &(c, r) in &inj.occupied {
            map.set_risk(NodeId::new(c, r), RiskClass::Occupied)?;
        }
        for &(c, r) in &inj.free {
            let n = NodeId::new(c, r);
            map.set_risk(n, RiskClass::Free)?;
            spurious[map.index(n)] = true;
        }
    }
    let mut brain = match kind {
        PlannerKind::Adaptive => Brain::Rollout(Box::new(CoveragePlanner::new(
            cfg.sensor,
            cfg.weights,
            cfg.planner,
            RangeMode::Adaptive { alpha: cfg.alpha },
        ))),
        PlannerKind::Lf4 | PlannerKind::Lf8 => Brain::Rollout(Box::new(lf_planner(
            kind.lf_config().expect("lf kind"),
            cfg.sensor,
            cfg.weights,
            cfg.planner,
        ))),
        PlannerKind::Decoupled => Brain::Decoupled,
    };
    let (sc, sr) = grid.start_cell();
    let mut m = Mission {
        grid,
        cfg,
        map,
        spurious,
        node: NodeId::new(sc, sr),
        heading: Direction::N,
        step: 0,
        path: 0.0,
        risk_sum: 0.0,
        seen: vec![false; grid.width() * grid.height()],
        covered_cells: 0,
        records: Vec::new(),
        visited: Vec::new(),
        episode: 0,
        fallback: false,
        scan: Scan::default(),
        bumps: 0,
    };
    m.sense()?;
    m.record();
    observer(m.step, &m.map);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episodes = Vec::new();
    let mut idle = 0;
    let termination = loop {
        if m.step >= cfg.step_limit {
            break Termination::StepLimit;
        }
        let ep_seed = rng.next_u64();
        let t0 = Instant::now();
        let window = m.map.window(m.node, cfg.window, cfg.window);
        let wnode = window
            .nearest_node(m.pose())
            .expect("robot inside its own window");
        let s = m.joint(window, wnode)?;
        let (plan, trace) = match &mut brain {
            Brain::Rollout(p) => {
                let out = p.plan(&s, &m.scan, ep_seed)?;
                (out.sequence, Some(out.trace))
            }
            Brain::Decoupled => (
                decoupled_planner(&s, &cfg.sensor, &cfg.weights, &cfg.decoupled),
                None,
            ),
        };
        let mut planning_ms = t0.elapsed().as_secs_f64() * 1e3;
        let fallback = plan.is_empty();
        let (path, target) = if fallback {
            if let Brain::Rollout(p) = &mut brain {
                p.reset_plan();
            }
            let t1 = Instant::now();
            let global = m.joint(m.map.clone(), m.node)?;
            let fb = global_fallback(&global, cfg.weights.k_rho);
            planning_ms += t1.elapsed().as_secs_f64() * 1e3;
            match fb {
                None => break Termination::Complete,
                Some(seq) => {
                    let path = seq.path_in(&m.map);
                    let last = *path.last().expect("path has its start");
                    (path, Some(last))
                }
            }
        } else {
            (plan.path_in(&m.map), None)
        };
        m.episode += 1;
        m.fallback = fallback;
        let limit = if fallback { usize::MAX } else { cfg.planner.episode_period };
        let mut executed = 0;
        let bumps = m.bumps;
        for &next in path.iter().skip(1) {
            if executed >= limit || m.step >= cfg.step_limit {
                break;
            }
            if let Some((c, r)) = target {
                let t = NodeId::new(c as usize, r as usize);
                if executed > 0 && !is_frontier(&m.map, t) {
                    break;
                }
            }
            if !m.advance(next)? {
                if let Brain::Rollout(p) = &mut brain {
                    p.reset_plan();
                }
                break;
            }
            executed += 1;
            observer(m.step, &m.map);
        }
        episodes.push(EpisodeRecord {
            episode: m.episode,
            step: m.step,
            planning_ms,
            fallback,
            executed,
            trace,
        });
        if executed == 0 && m.bumps == bumps {
            idle += 1;
            if idle >= 3 {
                break Termination::Stalled;
            }
        } else {
            idle = 0;
        }
    };

    Ok(MissionLog {
        planner: kind,
        seed,
        records: m.records,
        episodes,
        risk_sum: m.risk_sum,
        termination,
        visited: m.visited,
        final_map: m.map,
    })
}
