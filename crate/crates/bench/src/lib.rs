//! Shared inputs for the criterion benches.

use bellsim_core::lrhvm::EnsembleRun;
use bellsim_core::{DensityMatrix, PureState};

/// `points` evenly spaced angles over `[0°, 90°]`, radians.
pub fn theta_grid(points: usize) -> Vec<f64> {
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|i| (90.0 * i as f64 / last).to_radians())
        .collect()
}

/// Cat-state run at room-temperature polarization.
pub fn cat_run(points: usize) -> EnsembleRun {
    EnsembleRun::new("cat", PureState::cat(2).expect("two qubits"), 1e-6, theta_grid(points))
}

/// GHZ-type pseudo-pure state on `n` qubits.
pub fn cat_pps(n: usize, epsilon: f64) -> DensityMatrix {
    bellsim_core::pps::make_pps(&PureState::cat(n).expect("qubit count within limit"), epsilon)
        .expect("valid polarization")
        .into_rho()
}
