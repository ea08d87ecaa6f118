//! Travelling-wave solutions of the one-dimensional Cahn-Hilliard equation
//! with travelling-wave forcing, for arbitrary mean concentration.
//!
//! The crate provides three independent routes to steady waves (shooting on
//! the reduced first-order model, Newton with backtracking line search on the
//! reduced or full model, and semi-implicit pseudospectral time stepping),
//! linear stability of the resulting waves, and parameter-space scans that
//! classify flow patterns.

pub mod cartographer;
pub mod cases;
pub mod error;
pub mod grid;
pub mod io;
pub mod newton;
pub mod operators;
pub mod params;
pub mod reduced;
pub mod spectral;
pub mod stability;
pub mod tens;

pub use cartographer::{
    scan_full, scan_reduced, trace_neutral_curve, Axis, Classification, FlowMap, FullScanConfig, NeutralCurve,
    ReducedMap, ReducedScanConfig, ScanAxes,
};
pub use cases::{classify_case, Case, CaseLabel};
pub use error::{Error, Result};
pub use grid::{make_grid, mirror_profile, Profile};
pub use newton::{newton_linesearch, GuessKind, Model, NewtonConfig, TravellingWave};
pub use operators::{Discretization, PeriodicOperator};
pub use params::ProblemParams;
pub use spectral::{Fourier, SpectralState};
pub use stability::{analytic_bounds, compute_spectrum, StabilityOptions, StabilityReport, Verdict};
pub use tens::{InitialCondition, TensConfig, TensResult};
