//! Shared fixtures for the solver benchmarks.

use chwave::newton::solve_wave;
use chwave::{GuessKind, Model, NewtonConfig, ProblemParams, TravellingWave};

/// Stable single-spike wave at `<psi> = 0.5`, `f0 = 1.5`, `v = 1`, `eps = 5e-4`.
pub fn spike_params() -> ProblemParams {
    ProblemParams::new(0.5, 1.5, 1.0).with_eps(5e-4)
}

/// Small-forcing wave at `<psi> = 0.65`, `f0 = 0.1`.
pub fn a2_params() -> ProblemParams {
    ProblemParams::new(0.65, 0.1, 1.0).with_eps(5e-4)
}

pub fn converged_wave(params: &ProblemParams, kind: GuessKind, n: usize) -> TravellingWave {
    solve_wave(params, Model::Full, kind, n, &NewtonConfig::default()).expect("fixture wave converges")
}
