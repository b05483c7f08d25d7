//! Risk-aware shortest paths and the nearest-frontier fallback.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ActionSequence, Step};
use crate::decision_core::{Direction, JointState};
use crate::world_model::{Irm, NodeId, RiskClass};

const COST_TIE: f64 = 1e-9;

/// Single-source shortest paths over Free nodes with edge cost `d + k_rho * rho`.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    width: usize,
    source: NodeId,
    dist: Vec<f64>,
    prev: Vec<Option<(usize, Direction)>>,
}

impl ShortestPaths {
    pub fn source(&self) -> NodeId {
        self.source
    }

    /// Path cost to `n`, infinite when unreachable.
    pub fn cost(&self, n: NodeId) -> f64 {
        self.dist[n.row * self.width + n.col]
    }

    pub fn reachable(&self, n: NodeId) -> bool {
        self.cost(n).is_finite()
    }

    /// Actions leading from the source to `n`.
    pub fn actions_to(&self, n: NodeId) -> Option<Vec<Direction>> {
        if !self.reachable(n) {
            return None;
        }
        let mut idx = n.row * self.width + n.col;
        let mut out = Vec::new();
        while let Some((p, a)) = self.prev[idx] {
            out.push(a);
            idx = p;
        }
        out.reverse();
        Some(out)
    }

    /// Nodes from the source to `n`, both included.
    pub fn path_to(&self, n: NodeId) -> Option<Vec<NodeId>> {
        let actions = self.actions_to(n)?;
        let mut cur = self.source;
        let mut out = vec![cur];
        for a in actions {
            let (dx, dy) = a.offset();
            cur = NodeId::new((cur.col as i64 + dx) as usize, (cur.row as i64 + dy) as usize);
            out.push(cur);
        }
        Some(out)
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source`. The source itself need not be Free.
pub fn shortest_paths(world: &Irm, source: NodeId, k_rho: f64) -> ShortestPaths {
    let w = world.cell_width();
    let mut dist = vec![f64::INFINITY; world.len()];
    let mut prev = vec![None; world.len()];
    let mut heap = BinaryHeap::new();
    let s = world.index(source);
    dist[s] = 0.0;
    heap.push(Item(0.0, s));
    while let Some(Item(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let n = world.node_from_index(i);
        for a in Direction::ALL {
            let Some(m) = world.step(n, a) else { continue };
            if !world.is_free(m) {
                continue;
            }
            let j = world.index(m);
            let nd = d + a.step_length(w) + k_rho * world.edge_risk(n, a);
            if nd < dist[j] {
                dist[j] = nd;
                prev[j] = Some((i, a));
                heap.push(Item(nd, j));
            }
        }
    }
    ShortestPaths {
        width: world.width(),
        source,
        dist,
        prev,
    }
}

/// Free, not yet confidently covered, and next to unknown space.
/// A Free node with an Unknown node directly north, east, south or west.
/// Coverage is not consulted: cells at the mouth of a side passage are often
/// seen from close by while the passage itself is still hidden.
pub fn is_frontier(world: &Irm, n: NodeId) -> bool {
    world.is_free(n)
        && [Direction::N, Direction::E, Direction::S, Direction::W].iter().any(|&a| {
            world
                .step(n, a)
                .is_some_and(|m| world.risk(m) == RiskClass::Unknown)
        })
}

pub fn frontier_nodes(world: &Irm) -> Vec<NodeId> {
    (0..world.len())
        .map(|i| world.node_from_index(i))
        .filter(|&n| is_frontier(world, n))
        .collect()
}

/// Path to the cheapest reachable frontier other than the robot's own node.
/// Ties within a nanometre go to the smallest node id. `None` when no
/// frontier is reachable.
pub fn global_fallback(s: &JointState, k_rho: f64) -> Option<ActionSequence> {
    let sp = shortest_paths(&s.world, s.robot.node, k_rho);
    let mut best: Option<(f64, NodeId)> = None;
    for n in frontier_nodes(&s.world) {
        if n == s.robot.node || !sp.reachable(n) {
            continue;
        }
        let c = sp.cost(n);
        best = match best {
            None => Some((c, n)),
            Some((bc, bn)) => {
                if c < bc - COST_TIE || ((c - bc).abs() <= COST_TIE && n < bn) {
                    Some((c, n))
                } else {
                    Some((bc, bn))
                }
            }
        };
    }
    let (_, target) = best?;
    let steps = sp
        .actions_to(target)?
        .into_iter()
        .map(|action| Step { action, reward: 0.0 })
        .collect();
    Some(ActionSequence {
        steps,
        ..ActionSequence::empty_at(&s.world, s.robot.node)
    })
}
