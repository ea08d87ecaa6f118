//! Linear stability of steady waves.
//!
//! Perturbations `dC` of a steady profile `psi` evolve as `dC_t = A dC` with
//!
//! `A dC = v dC' + D (S dC)'' - eps D dC''''`, `S = 3 psi^2 - 1`.
//!
//! Every term is a derivative, so `A` maps into mean-zero fields and the
//! constant mode carries a trivial zero eigenvalue. Restricting to mean-zero
//! perturbations removes it.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cases::{classify_case, Case};
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::operators::{derivative_matrix, fd_bloch_matrix, spectral_matrix_complex, Discretization, PeriodicOperator};

/// Eigenvalues with `|Re| <= TOL_MARGINAL` give a marginal verdict.
pub const TOL_MARGINAL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn from_max_re(max_re: f64, tol: f64) -> Self {
        if max_re < -tol {
            Verdict::Stable
        } else if max_re > tol {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    /// Differentiation used for the operator. Spectral by default: the
    /// eigenvalues of constant states are then exact for every resolved mode.
    pub scheme: Discretization,
    pub project_mean_zero: bool,
    /// Bloch wavenumber `theta` in `[0, 2 pi / L)`; perturbations are
    /// `exp(i theta eta)` times an `L`-periodic factor. The mean-zero
    /// restriction only applies at `theta = 0`.
    pub bloch_theta: f64,
    pub tol_marginal: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            scheme: Discretization::Spectral,
            project_mean_zero: true,
            bloch_theta: 0.0,
            tol_marginal: TOL_MARGINAL,
        }
    }
}

/// Sampled scalars of `S = 3 psi^2 - 1` and the two sufficient conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    pub case: Case,
    pub s_min: f64,
    pub s_abs_min: f64,
    pub s_ddot_max: f64,
    /// Stability guaranteed: Case 0 or 2 and `S_min (2 pi/L)^2 >= |S''|_max / 2`.
    pub stable_bound: bool,
    /// Instability guaranteed: Case 1 and `|S|_min (2 pi/L)^2 >= |S''|_max / 2`.
    pub unstable_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub base: Profile,
    pub eps: f64,
    pub options: StabilityOptions,
    /// Eigenvalues sorted by decreasing real part.
    #[serde(with = "complex_pairs")]
    pub spectrum: Vec<Complex64>,
    pub max_re: f64,
    pub verdict: Verdict,
    pub analytic_stable_bound: bool,
    pub analytic_unstable_bound: bool,
    pub s_min: f64,
    pub s_abs_min: f64,
    pub s_ddot_max: f64,
}

impl StabilityReport {
    /// Eigenvalue with the largest real part.
    pub fn leading(&self) -> Complex64 {
        self.spectrum[0]
    }
}

fn s_values(base: &Profile) -> Vec<f64> {
    base.values.iter().map(|p| 3.0 * p * p - 1.0).collect()
}

/// Dense real matrix of the linearized operator about `base`.
pub fn assemble_linearized(base: &Profile, eps: f64, scheme: Discretization) -> Mat<f64> {
    let p = &base.params;
    let n = base.n_points();
    let l = p.l_period;
    let s = s_values(base);
    let d1 = derivative_matrix(scheme, 1, n, l);
    let d2 = derivative_matrix(scheme, 2, n, l);
    let d4 = (eps > 0.0).then(|| derivative_matrix(scheme, 4, n, l));
    Mat::from_fn(n, n, |i, j| {
        let mut a = p.v * d1[(i, j)] + p.d_mob * d2[(i, j)] * s[j];
        if let Some(d4) = &d4 {
            a -= eps * p.d_mob * d4[(i, j)];
        }
        a
    })
}

/// Operator acting on the periodic factor of Bloch perturbations
/// `exp(i theta eta) u(eta)`.
pub fn assemble_linearized_bloch(base: &Profile, eps: f64, scheme: Discretization, theta: f64) -> Mat<Complex64> {
    let p = &base.params;
    let n = base.n_points();
    let l = p.l_period;
    let s = s_values(base);
    let op = |order: u8| match scheme {
        Discretization::Spectral => spectral_matrix_complex(order, n, l, theta),
        Discretization::FiniteDifference4 => fd_bloch_matrix(order, n, l, theta),
    };
    let (d1, d2, d4) = (op(1), op(2), op(4));
    Mat::from_fn(n, n, |i, j| {
        d1[(i, j)] * p.v + d2[(i, j)] * (p.d_mob * s[j]) - d4[(i, j)] * (eps * p.d_mob)
    })
}

/// `Q^T A Q` for an orthonormal basis `Q` of the mean-zero subspace, using the
/// Householder reflection `H` that swaps `e_0` and `1/sqrt(N)`: columns
/// `1..N` of `H` span the subspace.
fn compress_mean_zero(a: &Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    let u = 1.0 / (n as f64).sqrt();
    let mut w = vec![u; n];
    w[0] -= 1.0;
    let beta = 2.0 / w.iter().map(|x| x * x).sum::<f64>();
    // H A = A - beta w (w^T A)
    let wt_a: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[i] * a[(i, j)]).sum()).collect();
    let ha = Mat::from_fn(n, n, |i, j| a[(i, j)] - beta * w[i] * wt_a[j]);
    // (H A) H = H A - beta (H A w) w^T
    let haw: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ha[(i, j)] * w[j]).sum()).collect();
    Mat::from_fn(n - 1, n - 1, |i, j| ha[(i + 1, j + 1)] - beta * haw[i + 1] * w[j + 1])
}

fn sort_spectrum(mut ev: Vec<Complex64>) -> Vec<Complex64> {
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    ev
}

/// Eigenvalues of the linearized operator about `base`, with verdict and the
/// analytic bounds evaluated on the same profile.
pub fn compute_spectrum(base: &Profile, eps: f64, opts: &StabilityOptions) -> Result<StabilityReport> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParams(format!("eps must be non-negative, got {eps}")));
    }
    let failure = |e: faer::linalg::evd::EvdError| Error::SpectrumFailure(format!("{e:?}"));
    let spectrum = if opts.bloch_theta != 0.0 {
        let a = assemble_linearized_bloch(base, eps, opts.scheme, opts.bloch_theta);
        a.eigenvalues().map_err(failure)?
    } else {
        let a = assemble_linearized(base, eps, opts.scheme);
        let a = if opts.project_mean_zero { compress_mean_zero(&a) } else { a };
        a.eigenvalues().map_err(failure)?
    };
    if spectrum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SpectrumFailure("non-finite eigenvalue".into()));
    }
    let spectrum = sort_spectrum(spectrum);
    let max_re = spectrum.first().map_or(f64::NEG_INFINITY, |z| z.re);
    let bounds = analytic_bounds(base);
    Ok(StabilityReport {
        base: base.clone(),
        eps,
        options: *opts,
        spectrum,
        max_re,
        verdict: Verdict::from_max_re(max_re, opts.tol_marginal),
        analytic_stable_bound: bounds.stable_bound,
        analytic_unstable_bound: bounds.unstable_bound,
        s_min: bounds.s_min,
        s_abs_min: bounds.s_abs_min,
        s_ddot_max: bounds.s_ddot_max,
    })
}

/// Evaluates the sufficient stability and instability conditions for a
/// reduced-model wave. `S''` is taken with the fourth-order stencil.
pub fn analytic_bounds(base: &Profile) -> AnalyticBounds {
    let p = &base.params;
    let s = s_values(base);
    let s_dd = PeriodicOperator::new(2, s.len(), p.l_period).apply(&s);
    let s_min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let s_abs_min = s.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let s_ddot_max = s_dd.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let q1 = (2.0 * PI / p.l_period).powi(2);
    let case = classify_case(p).case;
    let stable_bound = matches!(case, Case::Case0 | Case::Case2) && s_min * q1 >= 0.5 * s_ddot_max;
    let unstable_bound = case == Case::Case1 && s_abs_min * q1 >= 0.5 * s_ddot_max;
    AnalyticBounds {
        case,
        s_min,
        s_abs_min,
        s_ddot_max,
        stable_bound,
        unstable_bound,
    }
}

/// `lambda_j = -D S q^2 - eps D q^4 + i v q` for a constant state with
/// `S = 3 c0^2 - 1` and `q = 2 pi j / L`.
pub fn dispersion_relation(c0: f64, d_mob: f64, v: f64, eps: f64, l_period: f64, j: i64) -> Complex64 {
    let q = 2.0 * PI * j as f64 / l_period;
    let s = 3.0 * c0 * c0 - 1.0;
    Complex64::new(-d_mob * s * q * q - eps * d_mob * q.powi(4), v * q)
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProblemParams;

    fn constant(c0: f64, v: f64, eps: f64, n: usize) -> Profile {
        Profile::constant(ProblemParams::new(c0, 0.0, v).with_eps(eps), n, c0).unwrap()
    }

    /// Relative mismatch between each analytic eigenvalue with `1 <= |j| <= jmax`
    /// and its nearest computed counterpart.
    fn dispersion_mismatch(report: &StabilityReport, c0: f64, v: f64, eps: f64, jmax: i64) -> f64 {
        let mut worst: f64 = 0.0;
        for j in (-jmax..=jmax).filter(|&j| j != 0) {
            let exact = dispersion_relation(c0, 1.0, v, eps, 1.0, j);
            let nearest = report
                .spectrum
                .iter()
                .map(|z| (z - exact).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / exact.norm());
        }
        worst
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_max_re(-1e-3, TOL_MARGINAL), Verdict::Stable);
        assert_eq!(Verdict::from_max_re(1e-3, TOL_MARGINAL), Verdict::Unstable);
        assert_eq!(Verdict::from_max_re(5e-7, TOL_MARGINAL), Verdict::Marginal);
    }

    #[test]
    fn constant_state_matches_dispersion() {
        for (c0, eps) in [(0.7, 0.0), (0.1, 0.0), (0.7, 5e-4), (0.1, 1e-3)] {
            let n = 64;
            let r = compute_spectrum(&constant(c0, 1.0, eps, n), eps, &StabilityOptions::default()).unwrap();
            assert_eq!(r.spectrum.len(), n - 1);
            let err = dispersion_mismatch(&r, c0, 1.0, eps, (n / 8) as i64);
            assert!(err < 1e-9, "c0 {c0} eps {eps}: {err}");
        }
    }

    #[test]
    fn spinodal_verdicts() {
        let stable = compute_spectrum(&constant(0.7, 1.0, 0.0, 32), 0.0, &StabilityOptions::default()).unwrap();
        assert_eq!(stable.verdict, Verdict::Stable);
        let expected = -0.47 * (2.0 * PI).powi(2);
        assert!((stable.max_re - expected).abs() < 1e-9);
        assert!(stable.analytic_stable_bound);

        let unstable = compute_spectrum(&constant(0.1, 1.0, 0.0, 32), 0.0, &StabilityOptions::default()).unwrap();
        assert_eq!(unstable.verdict, Verdict::Unstable);
        assert!(unstable.max_re >= 0.97 * (2.0 * PI).powi(2) - 1e-9);
        assert!(unstable.analytic_unstable_bound);
    }

    #[test]
    fn unprojected_spectrum_keeps_the_zero_mode() {
        let opts = StabilityOptions {
            project_mean_zero: false,
            ..Default::default()
        };
        let r = compute_spectrum(&constant(0.7, 1.0, 0.0, 32), 0.0, &opts).unwrap();
        assert_eq!(r.spectrum.len(), 32);
        assert_eq!(r.verdict, Verdict::Marginal);
    }

    #[test]
    fn spectrum_is_closed_under_conjugation() {
        let prm = ProblemParams::new(0.3, 0.4, 1.0).with_eps(1e-3);
        let base = Profile::from_fn(prm, 48, |x| 0.3 + 0.5 * (2.0 * PI * x).sin() + 0.1 * (4.0 * PI * x).cos()).unwrap();
        for scheme in [Discretization::Spectral, Discretization::FiniteDifference4] {
            let opts = StabilityOptions {
                scheme,
                ..Default::default()
            };
            let r = compute_spectrum(&base, 1e-3, &opts).unwrap();
            for z in &r.spectrum {
                let partner = r.spectrum.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                assert!(partner <= 1e-8 * z.norm().max(1.0), "{z}");
            }
        }
    }

    #[test]
    fn compression_drops_exactly_the_constant_mode() {
        let prm = ProblemParams::new(0.2, 0.5, 1.0);
        let base = Profile::from_fn(prm, 24, |x| 0.2 + 0.3 * (2.0 * PI * x).cos()).unwrap();
        let full = compute_spectrum(
            &base,
            0.0,
            &StabilityOptions {
                project_mean_zero: false,
                ..Default::default()
            },
        )
        .unwrap();
        let projected = compute_spectrum(&base, 0.0, &StabilityOptions::default()).unwrap();
        // every projected eigenvalue appears in the full spectrum
        for z in &projected.spectrum {
            let d = full.spectrum.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-7 * z.norm().max(1.0));
        }
        let zeros = full.spectrum.iter().filter(|z| z.norm() < 1e-8).count();
        assert!(zeros >= 1);
    }

    #[test]
    fn bloch_shift_of_constant_state() {
        let l = 1.0;
        let theta = 0.3 * 2.0 * PI / l;
        let opts = StabilityOptions {
            bloch_theta: theta,
            ..Default::default()
        };
        let (c0, eps) = (0.7, 1e-3);
        let r = compute_spectrum(&constant(c0, 1.0, eps, 32), eps, &opts).unwrap();
        assert_eq!(r.spectrum.len(), 32);
        for j in -3i64..=3 {
            let q = 2.0 * PI * j as f64 / l + theta;
            let s = 3.0 * c0 * c0 - 1.0;
            let exact = Complex64::new(-s * q * q - eps * q.powi(4), q);
            let d = r.spectrum.iter().map(|w| (w - exact).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8 * exact.norm().max(1.0), "j {j}");
        }
    }

    #[test]
    fn fd_operator_is_close_for_low_modes() {
        let (c0, eps) = (0.1, 5e-4);
        let opts = StabilityOptions {
            scheme: Discretization::FiniteDifference4,
            ..Default::default()
        };
        let r = compute_spectrum(&constant(c0, 1.0, eps, 128), eps, &opts).unwrap();
        assert!(dispersion_mismatch(&r, c0, 1.0, eps, 4) < 1e-4);
    }

    #[test]
    fn analytic_bounds_of_constant_states() {
        let b = analytic_bounds(&constant(0.7, 1.0, 0.0, 64));
        assert!(b.stable_bound && !b.unstable_bound);
        assert!((b.s_min - 0.47).abs() < 1e-12);
        assert!(b.s_ddot_max < 1e-6);
        let b = analytic_bounds(&constant(0.1, 1.0, 0.0, 64));
        assert!(b.unstable_bound && !b.stable_bound);
        assert!((b.s_abs_min - 0.97).abs() < 1e-12);
    }
}
