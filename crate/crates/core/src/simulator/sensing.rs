//! Simulated range finder and map upkeep from ground truth.

use crate::coverage_sensor::{coverage_update, ray_direction, trace_cells, CoverageModel, Scan};
use crate::decision_core::Direction;
use crate::error::SimError;
use crate::world_model::{Irm, NodeId, RiskClass, WorldPoint};

use super::GroundTruthGrid;

/// Walk one ray through the truth grid. `visit(col, row, dist, hit)` sees
/// every cell entered before `max_range`, ending with the first occupied one
/// (`hit = true`) if it lies in range. Returns the ray's end distance.
fn cast(
    grid: &GroundTruthGrid,
    pose: WorldPoint,
    dir: (f64, f64),
    max_range: f64,
    mut visit: impl FnMut(i64, i64, f64, bool),
) -> f64 {
    let w = grid.cell_width();
    let (c0, r0) = grid.cell_of(pose);
    let frac = (pose.x / w - c0 as f64, pose.y / w - r0 as f64);
    let mut end = max_range;
    trace_cells((c0, r0), frac, dir, |x, y, t| {
        let d = t * w;
        if d >= max_range {
            return false;
        }
        if grid.is_occupied(x, y) {
            visit(x, y, d, true);
            end = d;
            return false;
        }
        visit(x, y, d, false);
        true
    });
    end
}

/// Planar scan of `n_rays` evenly spaced rays. Each point is where the ray
/// first enters an occupied cell, or the max-range endpoint.
pub fn simulate_scan(
    pose: WorldPoint,
    grid: &GroundTruthGrid,
    n_rays: usize,
    max_range: f64,
) -> Result<Scan, SimError> {
    let (c, r) = grid.cell_of(pose);
    if grid.is_occupied(c, r) {
        return Err(SimError::PoseBlocked { x: pose.x, y: pose.y });
    }
    let points = (0..n_rays)
        .map(|k| {
            let dir = ray_direction(k, n_rays);
            let d = cast(grid, pose, dir, max_range, |_, _, _, _| {});
            WorldPoint::new(pose.x + d * dir.0, pose.y + d * dir.1)
        })
        .collect();
    Ok(Scan { origin: pose, points })
}

/// Write one scan's evidence into `irm`: cells a ray passes through become
/// Free, the cell that stops it becomes Occupied. Edges between Free nodes
/// touched by the scan get their risk from the ground truth. Cells outside
/// the lattice are ignored.
pub fn integrate_scan(
    irm: &mut Irm,
    grid: &GroundTruthGrid,
    pose: WorldPoint,
    n_rays: usize,
    max_range: f64,
) -> Result<(), SimError> {
    let (c, r) = grid.cell_of(pose);
    if grid.is_occupied(c, r) {
        return Err(SimError::PoseBlocked { x: pose.x, y: pose.y });
    }
    let (ox, oy) = irm.cell_offset_to(WorldPoint::default());
    let mut touched: Vec<NodeId> = Vec::new();
    let mut mark = vec![false; irm.len()];
    for k in 0..n_rays {
        cast(grid, pose, ray_direction(k, n_rays), max_range, |x, y, _, hit| {
            let Some(n) = irm.node_at(x + ox, y + oy) else {
                return;
            };
            let class = if hit { RiskClass::Occupied } else { RiskClass::Free };
            if irm.risk(n) != class {
                irm.set_risk(n, class).expect("in bounds");
            }
            let i = irm.index(n);
            if !hit && !mark[i] {
                mark[i] = true;
                touched.push(n);
            }
        });
    }
    for n in touched {
        let a = (n.col as i64 - ox, n.row as i64 - oy);
        for dir in Direction::ALL {
            let Some(m) = irm.step(n, dir) else { continue };
            if irm.is_free(m) {
                let b = (m.col as i64 - ox, m.row as i64 - oy);
                irm.set_edge_risk(n, m, grid.edge_risk(a, b)).expect("adjacent");
            }
        }
    }
    Ok(())
}

/// Scan, integrate and run the exact coverage update from the robot's node on
/// `irm` recentred at `pose`. Returns the updated map and the scan.
pub fn sense_and_update<M: CoverageModel + ?Sized>(
    irm: &Irm,
    pose: WorldPoint,
    grid: &GroundTruthGrid,
    model: &M,
    scan_range: f64,
) -> Result<(Irm, Scan), SimError> {
    let mut out = irm.recenter(pose);
    sense_in_place(&mut out, pose, grid, model, scan_range).map(|scan| (out, scan))
}

/// [`sense_and_update`] without recentring.
pub fn sense_in_place<M: CoverageModel + ?Sized>(
    irm: &mut Irm,
    pose: WorldPoint,
    grid: &GroundTruthGrid,
    model: &M,
    scan_range: f64,
) -> Result<Scan, SimError> {
    let scan = simulate_scan(pose, grid, model.n_rays(), scan_range)?;
    integrate_scan(irm, grid, pose, model.n_rays(), scan_range)?;
    if let Some(n) = irm.nearest_node(pose) {
        if irm.is_free(n) {
            coverage_update(irm, n, model).expect("node in bounds");
        }
    }
    Ok(scan)
}
