use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Smallest grid accepted anywhere in the crate.
pub const MIN_POINTS: usize = 8;

pub(crate) fn check_grid_size(n: usize) -> Result<()> {
    if n < MIN_POINTS {
        return Err(Error::InvalidGrid(format!("N = {n} is below the minimum of {MIN_POINTS}")));
    }
    if n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("N = {n} must be even")));
    }
    Ok(())
}

/// Uniform periodic grid `eta_i = i L / n`, `i = 0..n`. The right endpoint
/// `eta = L` is never included.
pub fn make_grid(params: &ProblemParams, n: usize) -> Result<Vec<f64>> {
    check_grid_size(n)?;
    Ok(periodic_samples(params.l_period, n))
}

pub(crate) fn periodic_samples(l_period: f64, n: usize) -> Vec<f64> {
    let h = l_period / n as f64;
    (0..n).map(|i| i as f64 * h).collect()
}

/// A concentration field sampled on the uniform periodic grid of `params`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub values: Vec<f64>,
    pub params: ProblemParams,
    /// Set when the profile claims to solve the problem: the tolerance to
    /// which its sample mean matches `params.mean_psi`.
    pub mean_tolerance: Option<f64>,
}

impl Profile {
    pub fn new(values: Vec<f64>, params: ProblemParams) -> Result<Self> {
        check_grid_size(values.len())?;
        Ok(Self {
            values,
            params,
            mean_tolerance: None,
        })
    }

    pub fn from_fn(params: ProblemParams, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eta = make_grid(&params, n)?;
        Self::new(eta.into_iter().map(f).collect(), params)
    }

    pub fn constant(params: ProblemParams, n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], params)
    }

    pub fn with_mean_tolerance(mut self, tol: f64) -> Self {
        self.mean_tolerance = Some(tol);
        self
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        self.params.l_period / self.values.len() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        periodic_samples(self.params.l_period, self.values.len())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when the mean matches `params.mean_psi` within the recorded
    /// tolerance; profiles without a recorded tolerance always pass.
    pub fn mean_consistent(&self) -> bool {
        match self.mean_tolerance {
            Some(tol) => (self.mean() - self.params.mean_psi).abs() <= tol,
            None => true,
        }
    }

    /// Max-norm distance to another profile on the same grid.
    pub fn max_distance(&self, other: &Profile) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    /// Circular shift by `shift` samples: `out[i] = values[(i + shift) % n]`.
    pub fn shifted(&self, shift: usize) -> Profile {
        let n = self.values.len();
        let values = (0..n).map(|i| self.values[(i + shift) % n]).collect();
        Profile {
            values,
            params: self.params,
            mean_tolerance: self.mean_tolerance,
        }
    }

    /// Minimum over circular shifts of the max-norm distance to `other`.
    pub fn max_distance_modulo_shift(&self, other: &Profile) -> (f64, usize) {
        (0..self.values.len())
            .map(|s| (self.shifted(s).max_distance(other), s))
            .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Mirror image `psi_hat(eta) = -psi(eta + L/2)`, which solves the same
/// problem with the mean negated.
pub fn mirror_profile(p: &Profile) -> Result<Profile> {
    let n = p.n_points();
    if n % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "half-period shift is not grid aligned for N = {n}"
        )));
    }
    let half = n / 2;
    let values = (0..n).map(|i| -p.values[(i + half) % n]).collect();
    Ok(Profile {
        values,
        params: p.params.mirrored(),
        mean_tolerance: p.mean_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_examples() {
        let p = ProblemParams::new(0.0, 0.0, 1.0);
        let g = periodic_samples(1.0, 4);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75]);
        let g = make_grid(&p, 8).unwrap();
        assert_eq!(g[1] - g[0], 0.125);
        let p2 = p.with_wavenumber(PI);
        let g = make_grid(&p2, 8).unwrap();
        assert_eq!(*g.last().unwrap(), 1.75);
        assert!(g.iter().all(|&x| x < 2.0));
    }

    #[test]
    fn grid_rejects_odd_or_tiny() {
        let p = ProblemParams::default();
        assert!(make_grid(&p, 9).is_err());
        assert!(make_grid(&p, 6).is_err());
        assert!(make_grid(&p, 0).is_err());
    }

    #[test]
    fn mirror_constant() {
        let p = ProblemParams::new(0.4, 0.0, 1.0);
        let c = Profile::constant(p, 16, 0.4).unwrap();
        let m = mirror_profile(&c).unwrap();
        assert!(m.values.iter().all(|&x| x == -0.4));
        assert_eq!(m.params.mean_psi, -0.4);
    }

    #[test]
    fn mirror_sine_is_itself() {
        let p = ProblemParams::new(0.0, 0.0, 1.0);
        let s = Profile::from_fn(p, 64, |x| (2.0 * PI * x).sin()).unwrap();
        let m = mirror_profile(&s).unwrap();
        assert!(m.max_distance(&s) < 1e-12);
    }

    #[test]
    fn mirror_rejects_odd_lengths() {
        let p = ProblemParams::default();
        let prof = Profile {
            values: vec![0.0; 9],
            params: p,
            mean_tolerance: None,
        };
        assert!(mirror_profile(&prof).is_err());
    }

    #[test]
    fn shift_distance_recovers_offset() {
        let p = ProblemParams::default();
        let a = Profile::from_fn(p, 32, |x| (2.0 * PI * x).cos()).unwrap();
        let b = a.shifted(5);
        let (d, s) = b.max_distance_modulo_shift(&a);
        assert!(d < 1e-14);
        assert_eq!((s + 5) % 32, 0);
    }

    proptest! {
        #[test]
        fn mirror_is_an_involution(vals in prop::collection::vec(-2.0f64..2.0, 4..64)) {
            let mut values = vals;
            if values.len() % 2 == 1 { values.pop(); }
            while values.len() < MIN_POINTS { values.push(0.1); }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let p = Profile::new(values, ProblemParams::new(mean, 0.1, 1.0)).unwrap();
            let back = mirror_profile(&mirror_profile(&p).unwrap()).unwrap();
            prop_assert_eq!(back.values, p.values);
            prop_assert_eq!(back.params.mean_psi, p.params.mean_psi);
        }
    }
}
