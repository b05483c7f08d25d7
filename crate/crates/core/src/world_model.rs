//! Information roadmap: a fixed-size, 8-connected lattice that rolls with the robot.
//!
//! Node `(col, row)` sits at `origin + (col * w, row * w)` in the world frame.
//! Storage is dense and row-major. Edge risk is kept per node and direction
//! and every write goes to both directions of the edge.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decision_core::Direction;
use crate::error::IrmError;
use crate::ppm;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Lattice coordinates. Ordering is lexicographic on `(col, row)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct NodeId {
    pub col: usize,
    pub row: usize,
}

impl NodeId {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

/// Binned traversability risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum RiskClass {
    Free,
    #[default]
    Unknown,
    Occupied,
}

impl RiskClass {
    /// Numeric risk probability `p_r`.
    pub fn probability(self) -> f64 {
        match self {
            RiskClass::Free => 0.0,
            RiskClass::Unknown => 0.5,
            RiskClass::Occupied => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IrmNode {
    pub risk: RiskClass,
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrmEdge {
    /// Traversal distance in meters.
    pub distance: f64,
    /// Accumulated traversal risk, unitless and non-negative.
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Irm {
    width: usize,
    height: usize,
    cell_width: f64,
    origin: WorldPoint,
    nodes: Vec<IrmNode>,
    edge_risk: Vec<[f64; 8]>,
}

impl Irm {
    /// Blank lattice: every node Unknown with zero coverage, every edge risk zero.
    pub fn new(
        width: usize,
        height: usize,
        cell_width: f64,
        origin: WorldPoint,
    ) -> Result<Self, IrmError> {
        if width < 3 || height < 3 || !(cell_width > 0.0) || !cell_width.is_finite() {
            return Err(IrmError::InvalidDimensions {
                width,
                height,
                cell_width,
            });
        }
        Ok(Self::blank(width, height, cell_width, origin))
    }

    fn blank(width: usize, height: usize, cell_width: f64, origin: WorldPoint) -> Self {
        Self {
            width,
            height,
            cell_width,
            origin,
            nodes: vec![IrmNode::default(); width * height],
            edge_risk: vec![[0.0; 8]; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn origin(&self) -> WorldPoint {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// World extent covered by node centres plus half a cell on each side.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width as f64 * self.cell_width,
            self.height as f64 * self.cell_width,
        )
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.col < self.width && n.row < self.height
    }

    /// Bounds-checked node from signed lattice coordinates.
    pub fn node_at(&self, col: i64, row: i64) -> Option<NodeId> {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some(NodeId::new(col as usize, row as usize))
        }
    }

    pub fn index(&self, n: NodeId) -> usize {
        debug_assert!(self.contains(n));
        n.row * self.width + n.col
    }

    pub fn node_from_index(&self, idx: usize) -> NodeId {
        NodeId::new(idx % self.width, idx / self.width)
    }

    fn check(&self, n: NodeId) -> Result<usize, IrmError> {
        if self.contains(n) {
            Ok(self.index(n))
        } else {
            Err(IrmError::OutOfBounds(n))
        }
    }

    pub fn node(&self, n: NodeId) -> &IrmNode {
        &self.nodes[self.index(n)]
    }

    pub fn nodes(&self) -> &[IrmNode] {
        &self.nodes
    }

    pub fn risk(&self, n: NodeId) -> RiskClass {
        self.node(n).risk
    }

    pub fn coverage(&self, n: NodeId) -> f64 {
        self.node(n).coverage
    }

    pub fn is_free(&self, n: NodeId) -> bool {
        self.risk(n) == RiskClass::Free
    }

    pub fn set_risk(&mut self, n: NodeId, class: RiskClass) -> Result<(), IrmError> {
        let idx = self.check(n)?;
        self.nodes[idx].risk = class;
        Ok(())
    }

    /// Coverage is clamped into `[0, 1]`.
    pub fn set_coverage(&mut self, n: NodeId, p: f64) -> Result<(), IrmError> {
        let idx = self.check(n)?;
        self.nodes[idx].coverage = p.clamp(0.0, 1.0);
        Ok(())
    }

    pub(crate) fn coverage_at_index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.nodes[idx].coverage
    }

    pub fn set_edge_risk(&mut self, a: NodeId, b: NodeId, risk: f64) -> Result<(), IrmError> {
        self.check(a)?;
        self.check(b)?;
        if !(risk >= 0.0) {
            return Err(IrmError::NegativeRisk(risk));
        }
        let dir = Direction::between(a, b).ok_or(IrmError::NotAdjacent(a, b))?;
        let (ia, ib) = (self.index(a), self.index(b));
        self.edge_risk[ia][dir.index()] = risk;
        self.edge_risk[ib][dir.reverse().index()] = risk;
        Ok(())
    }

    /// Step from `n` along `dir`, if the target stays inside the lattice.
    pub fn step(&self, n: NodeId, dir: Direction) -> Option<NodeId> {
        let (dx, dy) = dir.offset();
        self.node_at(n.col as i64 + dx, n.row as i64 + dy)
    }

    /// Edge record for `n -> n + dir`, if the target is in bounds.
    pub fn edge(&self, n: NodeId, dir: Direction) -> Option<(NodeId, IrmEdge)> {
        let target = self.step(n, dir)?;
        Some((
            target,
            IrmEdge {
                distance: dir.step_length(self.cell_width),
                risk: self.edge_risk[self.index(n)][dir.index()],
            },
        ))
    }

    pub fn edge_risk(&self, n: NodeId, dir: Direction) -> f64 {
        self.edge_risk[self.index(n)][dir.index()]
    }

    pub fn neighbors(&self, n: NodeId) -> Result<Vec<(NodeId, IrmEdge)>, IrmError> {
        self.check(n)?;
        Ok(Direction::ALL
            .iter()
            .filter_map(|&d| self.edge(n, d))
            .collect())
    }

    pub fn node_center(&self, n: NodeId) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + n.col as f64 * self.cell_width,
            self.origin.y + n.row as f64 * self.cell_width,
        )
    }

    /// Signed lattice coordinates of the cell containing `p`.
    pub fn cell_of(&self, p: WorldPoint) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell_width).round() as i64,
            ((p.y - self.origin.y) / self.cell_width).round() as i64,
        )
    }

    pub fn nearest_node(&self, p: WorldPoint) -> Option<NodeId> {
        let (c, r) = self.cell_of(p);
        self.node_at(c, r)
    }

    /// Whole-cell offset of `other`'s origin relative to ours.
    pub fn cell_offset_to(&self, other_origin: WorldPoint) -> (i64, i64) {
        (
            ((other_origin.x - self.origin.x) / self.cell_width).round() as i64,
            ((other_origin.y - self.origin.y) / self.cell_width).round() as i64,
        )
    }

    /// Copy of this lattice re-framed to a new size and an origin shifted by
    /// whole cells. Overlapping cells keep their data bit-for-bit, new cells
    /// are blank.
    pub fn reframed(&self, shift: (i64, i64), width: usize, height: usize) -> Irm {
        let origin = WorldPoint::new(
            self.origin.x + shift.0 as f64 * self.cell_width,
            self.origin.y + shift.1 as f64 * self.cell_width,
        );
        let mut out = Irm::blank(width, height, self.cell_width, origin);
        for row in 0..height {
            let src_row = row as i64 + shift.1;
            if src_row < 0 || src_row >= self.height as i64 {
                continue;
            }
            for col in 0..width {
                let src_col = col as i64 + shift.0;
                if src_col < 0 || src_col >= self.width as i64 {
                    continue;
                }
                let src = src_row as usize * self.width + src_col as usize;
                let dst = row * width + col;
                out.nodes[dst] = self.nodes[src];
                out.edge_risk[dst] = self.edge_risk[src];
            }
        }
        out
    }

    /// Shift the window by whole cells so `new_center` lands on the central node.
    pub fn recenter(&self, new_center: WorldPoint) -> Irm {
        let (c, r) = self.cell_of(new_center);
        let shift = (c - (self.width / 2) as i64, r - (self.height / 2) as i64);
        self.reframed(shift, self.width, self.height)
    }

    /// A `width x height` window of this lattice whose central node is `center`.
    pub fn window(&self, center: NodeId, width: usize, height: usize) -> Irm {
        let shift = (
            center.col as i64 - (width / 2) as i64,
            center.row as i64 - (height / 2) as i64,
        );
        self.reframed(shift, width, height)
    }

    /// Binary PPM image, row 0 at the bottom so north is up.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut pixels = Vec::with_capacity(self.nodes.len());
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                let node = self.nodes[row * self.width + col];
                pixels.push(ppm::node_color(node));
            }
        }
        ppm::encode(self.width, self.height, &pixels)
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_ppm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marked(w: usize, h: usize) -> Irm {
        let mut irm = Irm::new(w, h, 1.0, WorldPoint::default()).unwrap();
        for row in 0..h {
            for col in 0..w {
                let n = NodeId::new(col, row);
                irm.set_coverage(n, (row * w + col) as f64 / (w * h) as f64)
                    .unwrap();
            }
        }
        irm
    }

    #[test]
    fn new_lattice_is_blank() {
        let irm = Irm::new(3, 3, 1.0, WorldPoint::default()).unwrap();
        assert_eq!(irm.len(), 9);
        assert!(irm
            .nodes()
            .iter()
            .all(|n| n.risk == RiskClass::Unknown && n.coverage == 0.0));
    }

    #[test]
    fn window_spans_expected_extent() {
        let irm = Irm::new(50, 50, 0.5, WorldPoint::new(-12.5, -12.5)).unwrap();
        assert_eq!(irm.extent(), (25.0, 25.0));
        let far = irm.node_center(NodeId::new(49, 49));
        assert!((far.x - 12.0).abs() < 1e-12 && (far.y - 12.0).abs() < 1e-12);
        assert_eq!(irm.nearest_node(WorldPoint::new(0.1, -0.1)), Some(NodeId::new(25, 25)));
    }

    #[test]
    fn rejects_small_or_degenerate_lattices() {
        assert!(Irm::new(2, 2, 1.0, WorldPoint::default()).is_err());
        assert!(Irm::new(3, 3, 0.0, WorldPoint::default()).is_err());
        assert!(Irm::new(3, 3, f64::NAN, WorldPoint::default()).is_err());
    }

    #[test]
    fn neighbor_counts_and_lengths() {
        let irm = Irm::new(3, 3, 1.0, WorldPoint::default()).unwrap();
        let center = irm.neighbors(NodeId::new(1, 1)).unwrap();
        assert_eq!(center.len(), 8);
        let short = center.iter().filter(|(_, e)| e.distance == 1.0).count();
        let long = center
            .iter()
            .filter(|(_, e)| (e.distance - std::f64::consts::SQRT_2).abs() < 1e-8)
            .count();
        assert_eq!((short, long), (4, 4));
        assert_eq!(irm.neighbors(NodeId::new(0, 0)).unwrap().len(), 3);
        assert_eq!(irm.neighbors(NodeId::new(1, 0)).unwrap().len(), 5);
        assert!(irm.neighbors(NodeId::new(3, 0)).is_err());
    }

    #[test]
    fn risk_store_and_load() {
        let mut irm = Irm::new(3, 3, 1.0, WorldPoint::default()).unwrap();
        let n = NodeId::new(1, 1);
        irm.set_risk(n, RiskClass::Occupied).unwrap();
        assert_eq!(irm.risk(n).probability(), 1.0);

        let m = NodeId::new(2, 2);
        assert_eq!(irm.set_edge_risk(n, m, -0.1), Err(IrmError::NegativeRisk(-0.1)));
        assert!(matches!(
            irm.set_edge_risk(NodeId::new(0, 0), m, 0.1),
            Err(IrmError::NotAdjacent(..))
        ));
        irm.set_edge_risk(n, m, 0.3).unwrap();
        let (_, e) = irm
            .neighbors(n)
            .unwrap()
            .into_iter()
            .find(|(t, _)| *t == m)
            .unwrap();
        assert_eq!(e.risk, 0.3);
        assert_eq!(irm.edge_risk(m, Direction::SW), 0.3);
    }

    #[test]
    fn recenter_identity() {
        let irm = marked(3, 3);
        let again = irm.recenter(irm.node_center(NodeId::new(1, 1)));
        assert_eq!(again, irm);
    }

    #[test]
    fn recenter_one_cell_east() {
        let irm = marked(3, 3);
        let moved = irm.recenter(irm.node_center(NodeId::new(2, 1)));
        assert_eq!(moved.origin(), WorldPoint::new(1.0, 0.0));
        for row in 0..3 {
            // interior columns shift west by one, old column 0 is dropped
            for col in 0..2 {
                assert_eq!(
                    moved.node(NodeId::new(col, row)),
                    irm.node(NodeId::new(col + 1, row))
                );
            }
            assert_eq!(*moved.node(NodeId::new(2, row)), IrmNode::default());
        }
    }

    #[test]
    fn recenter_beyond_width_resets() {
        let irm = marked(3, 3);
        let far = irm.recenter(WorldPoint::new(10.0, 1.0));
        assert!(far.nodes().iter().all(|n| *n == IrmNode::default()));
        assert_eq!(far.len(), irm.len());
    }

    #[test]
    fn window_copies_overlap() {
        let irm = marked(7, 7);
        let win = irm.window(NodeId::new(1, 1), 5, 5);
        assert_eq!(win.width(), 5);
        assert_eq!(win.node(NodeId::new(2, 2)), irm.node(NodeId::new(1, 1)));
        assert_eq!(*win.node(NodeId::new(0, 0)), IrmNode::default());
        assert_eq!(win.origin(), WorldPoint::new(-1.0, -1.0));
    }

    #[test]
    fn ppm_header_and_size() {
        let irm = Irm::new(4, 3, 1.0, WorldPoint::default()).unwrap();
        let bytes = irm.to_ppm();
        assert!(bytes.starts_with(b"P6\n4 3\n255\n"));
        assert_eq!(bytes.len(), b"P6\n4 3\n255\n".len() + 4 * 3 * 3);
        // unknown renders mid-gray
        assert_eq!(bytes[bytes.len() - 3..], [128, 128, 128]);
    }
}
