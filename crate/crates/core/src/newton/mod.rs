//! Steady travelling waves by Newton's method with backtracking line search.

mod guess;
mod solver;
mod system;

pub use guess::{count_spikes, guess_a2, guess_for, guess_spike, matches_family, Guess, GuessKind, SPIKE_RANGE};
pub use solver::{newton_linesearch, solve_wave, solve_wave_phases, NewtonConfig, TravellingWave, PHASE_TRIALS};
pub use system::{build_jacobian, build_residual, Model, WaveSystem};
