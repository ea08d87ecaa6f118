//! Reduced first-order model `D (psi^3 - psi)' + v (psi - <psi>) + f0 sin(k eta) = 0`.
//!
//! Periodic solutions are found by shooting on `X = psi^3 - psi`, which keeps
//! the integration away from the `3 psi^2 - 1 = 0` singularity of the
//! equation written for `psi` and turns a singular trajectory into an exit
//! from the real band of the selected cubic branch.

mod asymptotic;
mod branch;
pub mod ode;
mod shoot;

pub use asymptotic::{asymptotic_small_f0, first_order_correction};
pub use branch::{BranchIndex, BAND_EDGE};
pub use shoot::{
    integrate_dx, shoot_periodic, shoot_periodic_all, solve_reduced, ReducedSolution, Trajectory,
    BRACKET_SAMPLES, NEAR_SINGULAR, SHOOT_TOL,
};

use crate::grid::Profile;
use crate::operators::PeriodicOperator;

/// Pointwise residual `D d(psi^3 - psi)/deta + v (psi - <psi>) + f0 sin(k eta)`
/// using the fourth-order periodic first derivative.
pub fn reduced_residual_vector(p: &Profile) -> Vec<f64> {
    let prm = &p.params;
    let n = p.n_points();
    let op = PeriodicOperator::new(1, n, prm.l_period);
    let cubic: Vec<f64> = p.values.iter().map(|&x| x * x * x - x).collect();
    let d = op.apply(&cubic);
    let h = p.spacing();
    (0..n)
        .map(|i| prm.d_mob * d[i] + prm.v * (p.values[i] - prm.mean_psi) + prm.forcing(i as f64 * h))
        .collect()
}

/// Max-norm of [`reduced_residual_vector`].
pub fn residual_reduced(p: &Profile) -> f64 {
    reduced_residual_vector(p).iter().fold(0.0, |m, x| m.max(x.abs()))
}
