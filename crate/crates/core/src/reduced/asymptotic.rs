use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::params::ProblemParams;

/// First-order small-forcing correction `phi_1(eta)`, the periodic solution of
/// `D S0 phi_1' + v phi_1 + sin(k eta) = 0` with `S0 = 3 <psi>^2 - 1`:
///
/// `phi_1 = [k cos(k eta) - kappa sin(k eta)] / (D S0 (k^2 + kappa^2))`,
/// `kappa = v / (D S0)`.
///
/// At `v = 1` this is `kappa^2/(k^2 + kappa^2) [(k/kappa) cos - sin]`.
pub fn first_order_correction(params: &ProblemParams) -> Result<impl Fn(f64) -> f64> {
    let s0 = 3.0 * params.mean_psi * params.mean_psi - 1.0;
    if s0.abs() < 1e-8 {
        return Err(Error::DegenerateMean(s0.abs()));
    }
    let k = params.k_wave;
    let d = params.d_mob;
    let kappa = params.v / (d * s0);
    let scale = 1.0 / (d * s0 * (k * k + kappa * kappa));
    Ok(move |eta: f64| scale * (k * (k * eta).cos() - kappa * (k * eta).sin()))
}

/// `psi = <psi> + f0 phi_1(eta)` on an `n`-point grid.
pub fn asymptotic_small_f0(params: &ProblemParams, n: usize) -> Result<Profile> {
    let phi = first_order_correction(params)?;
    let m = params.mean_psi;
    let f0 = params.f0;
    Profile::from_fn(*params, n, |eta| m + f0 * phi(eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_forcing_is_constant() {
        let p = asymptotic_small_f0(&ProblemParams::new(0.7, 0.0, 1.0), 32).unwrap();
        assert!(p.values.iter().all(|&x| x == 0.7));
    }

    #[test]
    fn amplitude_factor_at_unit_speed() {
        let prm = ProblemParams::new(0.7, 1.0, 1.0);
        let kappa: f64 = 1.0 / 0.47;
        assert!((kappa - 2.127_659_574_468_085).abs() < 1e-12);
        let k = 2.0 * PI;
        let amp = kappa * kappa / (k * k + kappa * kappa);
        assert!((amp - 0.102_872_377_328_348_07).abs() < 1e-12);
        let phi = first_order_correction(&prm).unwrap();
        // phi(0) = amp * k / kappa, phi(L/4) = -amp
        assert!((phi(0.0) - amp * k / kappa).abs() < 1e-12);
        assert!((phi(0.25) + amp).abs() < 1e-12);
    }

    #[test]
    fn correction_has_zero_mean() {
        let prm = ProblemParams::new(0.3, 0.5, 2.0);
        let p = asymptotic_small_f0(&prm, 64).unwrap();
        assert!((p.mean() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn solves_the_linearized_equation_for_any_speed() {
        for v in [0.0, 0.5, 1.0, 2.0] {
            let prm = ProblemParams::new(0.7, 1.0, v).with_mobility(1.3);
            let phi = first_order_correction(&prm).unwrap();
            let s0 = 3.0 * 0.49 - 1.0;
            let h = 1e-5;
            for i in 0..10 {
                let x = i as f64 / 10.0;
                let dphi = (phi(x + h) - phi(x - h)) / (2.0 * h);
                let r = prm.d_mob * s0 * dphi + v * phi(x) + (prm.k_wave * x).sin();
                assert!(r.abs() < 1e-8, "v = {v}: {r}");
            }
        }
    }

    #[test]
    fn degenerate_mean_is_rejected() {
        let m = 1.0 / 3f64.sqrt();
        assert!(matches!(
            asymptotic_small_f0(&ProblemParams::new(m, 0.1, 1.0), 16),
            Err(Error::DegenerateMean(_))
        ));
    }
}
