use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_grid_size, periodic_samples};
use crate::operators::{matvec, spectral_matrix, Discretization, PeriodicOperator};
use crate::params::ProblemParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// First-order model, `eps = 0`.
    Reduced,
    /// Third-order model with the `eps D psi'''` term.
    Full,
}

#[derive(Clone, Debug)]
enum DiffOp {
    Stencil(PeriodicOperator),
    Dense(Mat<f64>),
}

impl DiffOp {
    fn new(scheme: Discretization, order: u8, n: usize, l: f64) -> Self {
        match scheme {
            Discretization::FiniteDifference4 => DiffOp::Stencil(PeriodicOperator::new(order, n, l)),
            Discretization::Spectral => DiffOp::Dense(spectral_matrix(order, n, l)),
        }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        match self {
            DiffOp::Stencil(op) => op.apply(u),
            DiffOp::Dense(m) => matvec(m, u),
        }
    }

    fn dense(&self) -> Mat<f64> {
        match self {
            DiffOp::Stencil(op) => op.to_dense(),
            DiffOp::Dense(m) => m.clone(),
        }
    }
}

/// Discretized travelling-wave system `F(psi) = 0` on an `n`-point grid:
///
/// `F = D Dx (psi^3 - psi) + v (psi - <psi> 1) + f - eps D Dxxx psi`
///
/// with `f_i = f0 sin(k eta_i)` and the last term present for the full model.
#[derive(Clone, Debug)]
pub struct WaveSystem {
    pub params: ProblemParams,
    pub model: Model,
    pub scheme: Discretization,
    n: usize,
    d1: DiffOp,
    d3: Option<DiffOp>,
    forcing: Vec<f64>,
}

impl WaveSystem {
    pub fn new(params: &ProblemParams, model: Model, scheme: Discretization, n: usize) -> Result<Self> {
        params.validate()?;
        check_grid_size(n)?;
        if model == Model::Full && params.eps <= 0.0 {
            return Err(Error::InvalidParams("the full model needs eps > 0".into()));
        }
        let l = params.l_period;
        let forcing = periodic_samples(l, n).into_iter().map(|x| params.forcing(x)).collect();
        Ok(Self {
            params: *params,
            model,
            scheme,
            n,
            d1: DiffOp::new(scheme, 1, n, l),
            d3: (model == Model::Full).then(|| DiffOp::new(scheme, 3, n, l)),
            forcing,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn residual(&self, psi: &[f64]) -> Vec<f64> {
        let p = &self.params;
        let cubic: Vec<f64> = psi.iter().map(|&x| x * x * x - x).collect();
        let mut f = self.d1.apply(&cubic);
        for i in 0..self.n {
            f[i] = p.d_mob * f[i] + p.v * (psi[i] - p.mean_psi) + self.forcing[i];
        }
        if let Some(d3) = &self.d3 {
            let third = d3.apply(psi);
            let c = p.eps * p.d_mob;
            f.iter_mut().zip(&third).for_each(|(fi, t)| *fi -= c * t);
        }
        f
    }

    /// `J = D Dx diag(3 psi^2 - 1) + v I - eps D Dxxx`.
    pub fn jacobian(&self, psi: &[f64]) -> Mat<f64> {
        let p = &self.params;
        let mut j = self.d1.dense();
        for c in 0..self.n {
            let s = p.d_mob * (3.0 * psi[c] * psi[c] - 1.0);
            j.col_as_slice_mut(c).iter_mut().for_each(|x| *x *= s);
        }
        if let Some(d3) = &self.d3 {
            let m3 = d3.dense();
            let c = p.eps * p.d_mob;
            for col in 0..self.n {
                let src = m3.col_as_slice(col);
                j.col_as_slice_mut(col)
                    .iter_mut()
                    .zip(src)
                    .for_each(|(a, b)| *a -= c * b);
            }
        }
        for i in 0..self.n {
            j[(i, i)] += p.v;
        }
        j
    }
}

/// Residual with the default fourth-order finite differences.
pub fn build_residual(psi: &[f64], params: &ProblemParams, model: Model) -> Result<Vec<f64>> {
    Ok(WaveSystem::new(params, model, Discretization::FiniteDifference4, psi.len())?.residual(psi))
}

/// Jacobian with the default fourth-order finite differences.
pub fn build_jacobian(psi: &[f64], params: &ProblemParams, model: Model) -> Result<Mat<f64>> {
    Ok(WaveSystem::new(params, model, Discretization::FiniteDifference4, psi.len())?.jacobian(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fd_check(sys: &WaveSystem, psi: &[f64], u: &[f64]) -> f64 {
        let h = 1e-6;
        let plus: Vec<f64> = psi.iter().zip(u).map(|(p, d)| p + h * d).collect();
        let minus: Vec<f64> = psi.iter().zip(u).map(|(p, d)| p - h * d).collect();
        let fp = sys.residual(&plus);
        let fm = sys.residual(&minus);
        let ju = matvec(&sys.jacobian(psi), u);
        (0..psi.len())
            .map(|i| ((fp[i] - fm[i]) / (2.0 * h) - ju[i]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_state_is_an_root_to_rounding() {
        let prm = ProblemParams::new(0.4, 0.0, 1.0).with_eps(1e-3);
        for model in [Model::Reduced, Model::Full] {
            let f = build_residual(&vec![0.4; 64], &prm, model).unwrap();
            assert!(f.iter().all(|&x| x.abs() < 1e-9), "{model:?}");
        }
    }

    #[test]
    fn jacobian_at_zero_state() {
        let prm = ProblemParams::new(0.0, 0.3, 1.5).with_mobility(0.8);
        let j = build_jacobian(&vec![0.0; 16], &prm, Model::Reduced).unwrap();
        let d1 = PeriodicOperator::new(1, 16, 1.0).to_dense();
        for r in 0..16 {
            for c in 0..16 {
                let expected = -0.8 * d1[(r, c)] + if r == c { 1.5 } else { 0.0 };
                assert!((j[(r, c)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_on_constants() {
        let prm = ProblemParams::new(0.3, 0.2, 1.7).with_eps(1e-3);
        let j = build_jacobian(&vec![0.3; 32], &prm, Model::Full).unwrap();
        let ones = matvec(&j, &vec![1.0; 32]);
        assert!(ones.iter().all(|x| (x - 1.7).abs() < 1e-6));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for scheme in [Discretization::FiniteDifference4, Discretization::Spectral] {
            for model in [Model::Reduced, Model::Full] {
                let prm = ProblemParams::new(0.2, 0.5, 1.0).with_eps(5e-4);
                let n = 64;
                let sys = WaveSystem::new(&prm, model, scheme, n).unwrap();
                let a: f64 = rng.gen_range(0.2..0.8);
                let ph: f64 = rng.gen_range(0.0..2.0 * PI);
                let psi: Vec<f64> = (0..n)
                    .map(|i| 0.2 + a * (2.0 * PI * i as f64 / n as f64 + ph).sin())
                    .collect();
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let err = fd_check(&sys, &psi, &u);
                // central differences in double precision; F is a cubic so the
                // truncation term is h^2 |F'''| ~ 1e-12 * (1/dx)
                assert!(err <= 1e-6, "{scheme:?} {model:?}: {err}");
            }
        }
    }

    #[test]
    fn full_model_requires_eps() {
        let prm = ProblemParams::new(0.0, 0.1, 1.0);
        assert!(WaveSystem::new(&prm, Model::Full, Discretization::FiniteDifference4, 64).is_err());
    }
}
