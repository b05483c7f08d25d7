//! Binary PPM (P6) encoding for debug dumps.

use crate::world_model::{IrmNode, RiskClass};

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];
pub const GRAY: Rgb = [128, 128, 128];
pub const WHITE: Rgb = [255, 255, 255];
pub const BROWN: Rgb = [139, 69, 19];
pub const RED: Rgb = [220, 20, 20];

/// Occupied is black, unknown gray, free fades from white (uncovered) to brown (covered).
pub fn node_color(node: IrmNode) -> Rgb {
    match node.risk {
        RiskClass::Occupied => BLACK,
        RiskClass::Unknown => GRAY,
        RiskClass::Free => shade(node.coverage),
    }
}

/// White-to-brown ramp for a probability in `[0, 1]`.
pub fn shade(p: f64) -> Rgb {
    let p = p.clamp(0.0, 1.0);
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * p).round() as u8;
    [
        mix(WHITE[0], BROWN[0]),
        mix(WHITE[1], BROWN[1]),
        mix(WHITE[2], BROWN[2]),
    ]
}

/// Pixels are row-major, top row first.
pub fn encode(width: usize, height: usize, pixels: &[Rgb]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel count mismatch");
    let header = format!("P6\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for px in pixels {
        out.extend_from_slice(px);
    }
    out
}
