use serde::{Deserialize, Serialize};

use crate::world_model::WorldPoint;

/// Planar range-finder scan: first obstacle hit or max-range endpoint per ray.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scan {
    pub origin: WorldPoint,
    pub points: Vec<WorldPoint>,
}

impl Scan {
    pub fn distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.distance(self.origin)).collect()
    }

    pub fn median_distance(&self) -> Option<f64> {
        let mut d = self.distances();
        if d.is_empty() {
            return None;
        }
        d.sort_by(f64::total_cmp);
        let mid = d.len() / 2;
        Some(if d.len() % 2 == 1 {
            d[mid]
        } else {
            0.5 * (d[mid - 1] + d[mid])
        })
    }
}

/// Low-pass filtered median scan distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaciousnessFilter {
    state: Option<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for SpaciousnessFilter {
    fn default() -> Self {
        Self {
            state: None,
            alpha1: 0.95,
            alpha2: 0.05,
        }
    }
}

impl SpaciousnessFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(state: f64) -> Self {
        Self {
            state: Some(state.max(0.0)),
            ..Self::default()
        }
    }

    /// Current estimate, zero before the first non-empty scan.
    pub fn state(&self) -> f64 {
        self.state.unwrap_or(0.0)
    }

    pub fn is_initialized(&self) -> bool {
        self.state.is_some()
    }

    /// Fold one scan in. The first scan seeds the state with its median;
    /// an empty scan leaves the state untouched.
    pub fn update(&mut self, scan: &Scan) -> f64 {
        if let Some(median) = scan.median_distance() {
            self.state = Some(match self.state {
                None => median,
                Some(prev) => self.alpha1 * prev + self.alpha2 * median,
            });
        }
        self.state()
    }
}

/// `alpha * r_spac`, saturating at `r_max`.
pub fn adaptive_range(r_spac: f64, alpha: f64, r_max: f64) -> f64 {
    if r_spac <= r_max / alpha {
        alpha * r_spac
    } else {
        r_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_at(distances: &[f64]) -> Scan {
        Scan {
            origin: WorldPoint::new(1.0, -2.0),
            points: distances
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let a = i as f64;
                    WorldPoint::new(1.0 + d * a.cos(), -2.0 + d * a.sin())
                })
                .collect(),
        }
    }

    #[test]
    fn fixed_point() {
        let mut f = SpaciousnessFilter::with_state(5.0);
        assert!((f.update(&scan_at(&[5.0; 12])) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn median_ignores_outliers() {
        let s = scan_at(&[1.0, 5.0, 5.0, 5.0, 100.0]);
        assert!((s.median_distance().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn blend_step() {
        let mut f = SpaciousnessFilter::with_state(4.0);
        let r = f.update(&scan_at(&[6.0, 6.0, 6.0]));
        assert!((r - 4.1).abs() < 1e-12);
    }

    #[test]
    fn first_scan_seeds_state() {
        let mut f = SpaciousnessFilter::new();
        assert!(!f.is_initialized());
        assert!((f.update(&scan_at(&[3.0, 2.0, 7.0])) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_scan_keeps_state() {
        let mut f = SpaciousnessFilter::with_state(2.5);
        assert_eq!(f.update(&Scan::default()), 2.5);
    }

    #[test]
    fn adaptive_range_branches() {
        assert_eq!(adaptive_range(3.0, 2.0, 8.0), 6.0);
        assert_eq!(adaptive_range(5.0, 2.0, 8.0), 8.0);
        assert_eq!(adaptive_range(4.0, 2.0, 8.0), 8.0);
    }
}
