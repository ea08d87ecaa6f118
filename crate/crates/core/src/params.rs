use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physical and numerical parameters of the forced travelling-wave problem.
///
/// The steady equation in the co-moving coordinate `eta = x - v t` reads
///
/// ```text
/// eps D psi''' = D (psi^3 - psi)' + v (psi - <psi>) + f0 sin(k eta)
/// ```
///
/// on an `L`-periodic domain with `L k = 2 pi`. Setting `eps = 0` gives the
/// first-order reduced model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub mean_psi: f64,
    pub f0: f64,
    pub v: f64,
    pub d_mob: f64,
    pub k_wave: f64,
    pub l_period: f64,
    pub eps: f64,
}

impl ProblemParams {
    /// Parameters with `D = 1`, `k = 2 pi`, `L = 1` and `eps = 0`.
    pub fn new(mean_psi: f64, f0: f64, v: f64) -> Self {
        Self {
            mean_psi,
            f0,
            v,
            d_mob: 1.0,
            k_wave: 2.0 * PI,
            l_period: 1.0,
            eps: 0.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_mobility(mut self, d_mob: f64) -> Self {
        self.d_mob = d_mob;
        self
    }

    /// Sets the forcing wavenumber and the matching period `L = 2 pi / k`.
    pub fn with_wavenumber(mut self, k_wave: f64) -> Self {
        self.k_wave = k_wave;
        self.l_period = 2.0 * PI / k_wave;
        self
    }

    pub fn with_mean(mut self, mean_psi: f64) -> Self {
        self.mean_psi = mean_psi;
        self
    }

    pub fn with_f0(mut self, f0: f64) -> Self {
        self.f0 = f0;
        self
    }

    pub fn with_v(mut self, v: f64) -> Self {
        self.v = v;
        self
    }

    /// The parameter set of the mirrored solution, `<psi> -> -<psi>`.
    pub fn mirrored(mut self) -> Self {
        self.mean_psi = -self.mean_psi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mean_psi,
            self.f0,
            self.v,
            self.d_mob,
            self.k_wave,
            self.l_period,
            self.eps,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.d_mob <= 0.0 {
            return Err(Error::InvalidParams(format!("mobility D = {} must be > 0", self.d_mob)));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidParams(format!("eps = {} must be >= 0", self.eps)));
        }
        if self.f0 < 0.0 {
            return Err(Error::InvalidParams(format!("f0 = {} must be >= 0", self.f0)));
        }
        if self.l_period <= 0.0 {
            return Err(Error::InvalidParams(format!("L = {} must be > 0", self.l_period)));
        }
        let rel = (self.l_period * self.k_wave - 2.0 * PI).abs() / (2.0 * PI);
        if rel > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "L k = {} differs from 2 pi",
                self.l_period * self.k_wave
            )));
        }
        Ok(())
    }

    /// Source term `f0 sin(k eta)` of the integrated travelling-wave equation.
    #[inline]
    pub fn forcing(&self, eta: f64) -> f64 {
        self.f0 * (self.k_wave * eta).sin()
    }

    /// Fundamental wavenumber of the periodic box, `2 pi / L`.
    #[inline]
    pub fn box_wavenumber(&self) -> f64 {
        2.0 * PI / self.l_period
    }
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_unit_period_convention() {
        let p = ProblemParams::new(0.7, 0.12, 1.0);
        assert_eq!(p.d_mob, 1.0);
        assert_eq!(p.l_period, 1.0);
        assert!((p.k_wave - 2.0 * PI).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn wavenumber_sets_period() {
        let p = ProblemParams::new(0.0, 0.1, 1.0).with_wavenumber(PI);
        assert!((p.l_period - 2.0).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ProblemParams::new(0.0, -1.0, 1.0).validate().is_err());
        assert!(ProblemParams::new(0.0, 0.1, 1.0).with_mobility(0.0).validate().is_err());
        assert!(ProblemParams::new(0.0, 0.1, 1.0).with_eps(-1e-4).validate().is_err());
        let mut p = ProblemParams::new(0.0, 0.1, 1.0);
        p.l_period = 2.0;
        assert!(p.validate().is_err());
        assert!(ProblemParams::new(f64::NAN, 0.1, 1.0).validate().is_err());
    }

    #[test]
    fn negative_mean_is_allowed() {
        ProblemParams::new(-0.7, 0.1, 1.0).validate().unwrap();
        assert_eq!(ProblemParams::new(0.3, 0.1, 1.0).mirrored().mean_psi, -0.3);
    }
}
