//! Probabilistic omnidirectional coverage sensor.
//!
//! A node at distance `r` from the sensor is covered with probability
//! `1 / (1 + exp(k (r - r0)))`. The exact update casts rays over the risk map
//! and stops each ray at the first node that is not clearly traversable or
//! lies beyond the maximum range. Planner rollouts replace the ray casting
//! with a precomputed [`CoverageMask`] built by running the exact update on an
//! obstacle-free lattice.

mod ray;
mod spaciousness;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{IrmError, MaskError};
use crate::world_model::{Irm, NodeId, RiskClass, WorldPoint};

pub(crate) use ray::{ray_direction, trace_cells};
pub use spaciousness::{adaptive_range, Scan, SpaciousnessFilter};

/// Logistic range model plus ray-casting settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    /// Sigmoid midpoint, meters.
    pub r0: f64,
    /// Sigmoid steepness, 1/meters.
    pub k: f64,
    /// Model-defined maximum range, meters.
    pub r_max: f64,
    pub n_rays: usize,
    /// Rays stop at nodes whose risk probability is not below this value.
    pub block_threshold: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            r0: 4.0,
            k: 1.5,
            r_max: 8.0,
            n_rays: 360,
            block_threshold: 0.5,
        }
    }
}

impl SensorParams {
    pub fn validate(&self) -> Result<(), MaskError> {
        if !(self.k > 0.0) {
            return Err(MaskError::InvalidParams("k must be positive"));
        }
        if !(self.r0 > 0.0 && self.r0 < self.r_max) {
            return Err(MaskError::InvalidParams("need 0 < r0 < r_max"));
        }
        if self.n_rays < 8 {
            return Err(MaskError::InvalidParams("need at least 8 rays"));
        }
        Ok(())
    }
}

/// Anything that can drive the ray-cast coverage update.
pub trait CoverageModel {
    /// Coverage probability of a node at distance `r` meters.
    fn probability(&self, r: f64) -> f64;
    fn max_range(&self) -> f64;
    fn n_rays(&self) -> usize;
    fn block_threshold(&self) -> f64;
}

impl CoverageModel for SensorParams {
    fn probability(&self, r: f64) -> f64 {
        coverage_probability(r, self)
    }
    fn max_range(&self) -> f64 {
        self.r_max
    }
    fn n_rays(&self) -> usize {
        self.n_rays
    }
    fn block_threshold(&self) -> f64 {
        self.block_threshold
    }
}

/// Non-probabilistic sensor: everything in line of sight below `range` is covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarySensor {
    pub range: f64,
    pub n_rays: usize,
    pub block_threshold: f64,
}

impl BinarySensor {
    pub fn new(range: f64) -> Self {
        Self {
            range,
            n_rays: 360,
            block_threshold: 0.5,
        }
    }
}

impl CoverageModel for BinarySensor {
    fn probability(&self, r: f64) -> f64 {
        if r < self.range {
            1.0
        } else {
            0.0
        }
    }
    fn max_range(&self) -> f64 {
        self.range
    }
    fn n_rays(&self) -> usize {
        self.n_rays
    }
    fn block_threshold(&self) -> f64 {
        self.block_threshold
    }
}

/// Same model with its maximum range replaced.
struct Ranged<'a, M: ?Sized> {
    inner: &'a M,
    range: f64,
}

impl<M: CoverageModel + ?Sized> CoverageModel for Ranged<'_, M> {
    fn probability(&self, r: f64) -> f64 {
        self.inner.probability(r)
    }
    fn max_range(&self) -> f64 {
        self.range
    }
    fn n_rays(&self) -> usize {
        self.inner.n_rays()
    }
    fn block_threshold(&self) -> f64 {
        self.inner.block_threshold()
    }
}

pub fn coverage_probability(r: f64, params: &SensorParams) -> f64 {
    1.0 / (1.0 + (params.k * (r - params.r0)).exp())
}

/// Ray-traced world coverage update from node `n_q`.
///
/// Each ray raises `p_c` to `max(p_c, P(r))` on every node it crosses until it
/// reaches a node with `p_r >= block_threshold` or `r >= max_range`. Cells
/// that fall off the lattice are skipped.
pub fn coverage_update<M: CoverageModel + ?Sized>(
    irm: &mut Irm,
    n_q: NodeId,
    model: &M,
) -> Result<(), IrmError> {
    if !irm.contains(n_q) {
        return Err(IrmError::OutOfBounds(n_q));
    }
    let w = irm.cell_width();
    let r_max = model.max_range();
    let threshold = model.block_threshold();
    // a cell entered past this ray parameter has its centre beyond r_max
    let t_limit = r_max / w + 1.0;
    let (x0, y0) = (n_q.col as i64, n_q.row as i64);
    let n_rays = model.n_rays();
    for k in 0..n_rays {
        trace_cells((x0, y0), (0.0, 0.0), ray_direction(k, n_rays), |x, y, t| {
            if t > t_limit {
                return false;
            }
            let Some(n) = irm.node_at(x, y) else {
                return true;
            };
            let r = w * ((x - x0) as f64).hypot((y - y0) as f64);
            let idx = irm.index(n);
            let node = irm.nodes()[idx];
            if node.risk.probability() < threshold && r < r_max {
                let p = model.probability(r);
                let c = irm.coverage_at_index_mut(idx);
                if p > *c {
                    *c = p;
                }
                true
            } else {
                false
            }
        });
    }
    Ok(())
}

/// Robot-centred stencil of coverage probabilities on an obstacle-free world.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    r_adapt: f64,
    cell_width: f64,
    radius: usize,
    values: Vec<f64>,
    entries: Vec<(i32, i32, f64)>,
}

impl CoverageMask {
    pub fn r_adapt(&self) -> f64 {
        self.r_adapt
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// Half side length in cells.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Value at offset `(dx, dy)` cells from the centre, zero outside the stencil.
    pub fn value(&self, dx: i64, dy: i64) -> f64 {
        let r = self.radius as i64;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        self.values[((dy + r) * (2 * r + 1) + dx + r) as usize]
    }

    /// Non-zero cells as `(dx, dy, m)`.
    pub fn entries(&self) -> &[(i32, i32, f64)] {
        &self.entries
    }

    fn from_values(r_adapt: f64, cell_width: f64, radius: usize, values: Vec<f64>) -> Self {
        let side = 2 * radius + 1;
        let r = radius as i32;
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| ((i % side) as i32 - r, (i / side) as i32 - r, v))
            .collect();
        Self {
            r_adapt,
            cell_width,
            radius,
            values,
            entries,
        }
    }
}

/// Run the exact coverage update on an all-free, all-uncovered lattice with
/// range `r_adapt` and keep the result as a stencil.
pub fn build_coverage_mask<M: CoverageModel + ?Sized>(
    r_adapt: f64,
    model: &M,
    cell_width: f64,
) -> Result<CoverageMask, MaskError> {
    if !(r_adapt > 0.0) {
        return Err(MaskError::NonPositiveRange(r_adapt));
    }
    if r_adapt > model.max_range() + 1e-9 {
        return Err(MaskError::RangeAboveMax {
            r_adapt,
            r_max: model.max_range(),
        });
    }
    let radius = (r_adapt / cell_width).ceil() as usize;
    let side = 2 * radius + 1;
    let padded = side + 2;
    let mut free = Irm::new(padded, padded, cell_width, WorldPoint::default())
        .map_err(|_| MaskError::InvalidParams("cell width must be positive"))?;
    for idx in 0..free.len() {
        let n = free.node_from_index(idx);
        free.set_risk(n, RiskClass::Free).expect("in bounds");
    }
    let ranged = Ranged {
        inner: model,
        range: r_adapt,
    };
    let center = NodeId::new(radius + 1, radius + 1);
    coverage_update(&mut free, center, &ranged).expect("centre in bounds");
    let mut values = Vec::with_capacity(side * side);
    for row in 0..side {
        for col in 0..side {
            values.push(free.coverage(NodeId::new(col + 1, row + 1)));
        }
    }
    Ok(CoverageMask::from_values(r_adapt, cell_width, radius, values))
}

/// Fast coverage update: element-wise max of the stencil centred on `n_q`
/// and the current map. Stencil cells off the lattice are dropped.
pub fn apply_mask(irm: &mut Irm, n_q: NodeId, mask: &CoverageMask) {
    let (cx, cy) = (n_q.col as i64, n_q.row as i64);
    for &(dx, dy, m) in mask.entries() {
        if let Some(n) = irm.node_at(cx + dx as i64, cy + dy as i64) {
            let idx = irm.index(n);
            let c = irm.coverage_at_index_mut(idx);
            if m > *c {
                *c = m;
            }
        }
    }
}

/// Masks memoised on the adaptive range quantised to `step` meters.
///
/// One cache serves one coverage model and one cell width.
#[derive(Debug, Clone)]
pub struct MaskCache {
    step: f64,
    masks: HashMap<u32, CoverageMask>,
}

impl Default for MaskCache {
    fn default() -> Self {
        Self::new(0.25)
    }
}

impl MaskCache {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            masks: HashMap::new(),
        }
    }

    /// Quantised range actually used for `r_adapt`, never above the model maximum.
    pub fn quantize(&self, r_adapt: f64, r_max: f64) -> f64 {
        let q = ((r_adapt / self.step).round() * self.step).max(self.step);
        q.min(r_max)
    }

    pub fn get<M: CoverageModel + ?Sized>(
        &mut self,
        r_adapt: f64,
        model: &M,
        cell_width: f64,
    ) -> Result<&CoverageMask, MaskError> {
        let r = self.quantize(r_adapt, model.max_range());
        let key = (r / self.step).round() as u32;
        match self.masks.entry(key) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => Ok(e.insert(build_coverage_mask(r, model, cell_width)?)),
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}
