//! The logistic coverage model, masks for a few adaptive ranges, and how
//! spaciousness drives the range.

use covplan::coverage_sensor::{
    adaptive_range, build_coverage_mask, coverage_probability, SensorParams, SpaciousnessFilter,
};
use covplan::simulator::{corridor_world, hall_world, simulate_scan};

fn main() {
    let params = SensorParams::default();
    println!("P_cov(r) with r0 = {}, k = {}", params.r0, params.k);
    for r in [0.0, 2.0, 4.0, 6.0, 8.0] {
        println!("  r = {r:>3.1} m  ->  {:.4}", coverage_probability(r, &params));
    }

    for r_adapt in [1.0, 3.0, 8.0] {
        let mask = build_coverage_mask(r_adapt, &params, 0.5).expect("valid range");
        let mass: f64 = mask.entries().iter().map(|e| e.2).sum();
        println!(
            "mask r_adapt = {r_adapt} m: {}x{} stencil, {} cells, mass {mass:.1}",
            mask.side(),
            mask.side(),
            mask.entries().len()
        );
    }

    for (name, grid) in [("corridor", corridor_world()), ("hall", hall_world())] {
        let mut filter = SpaciousnessFilter::new();
        let scan = simulate_scan(grid.start(), &grid, params.n_rays, params.r_max).expect("free start");
        let r_spac = filter.update(&scan);
        println!(
            "{name}: r_spac = {r_spac:.2} m, r_adapt = {:.2} m",
            adaptive_range(r_spac, 2.0, params.r_max)
        );
    }
}
