//! Calibrate the distance weight so cardinal and diagonal moves earn the same
//! reward in the reference state, for several adaptive ranges.

use covplan::coverage_sensor::{build_coverage_mask, SensorParams};
use covplan::decision_core::{calibrated, reference_state, reward, Direction, RewardWeights};

fn main() {
    let params = SensorParams::default();
    let base = RewardWeights {
        k_rho: 0.0,
        k_mu: 0.0,
        ..RewardWeights::default()
    };
    println!("{:>8} {:>10} {:>12} {:>12}", "r_adapt", "k_d", "R(E)", "R(NE)");
    for r_adapt in [1.0, 2.0, 4.0, 6.0, 8.0] {
        let mask = build_coverage_mask(r_adapt, &params, 0.5).expect("valid range");
        let wts = calibrated(&mask, &base);
        let s = reference_state(&mask, Direction::N);
        println!(
            "{r_adapt:>8.1} {:>10.4} {:>12.6} {:>12.6}",
            wts.k_d,
            reward(&s, Direction::E, &mask, &wts),
            reward(&s, Direction::NE, &mask, &wts)
        );
    }
}
