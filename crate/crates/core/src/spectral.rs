use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{check_grid_size, Profile};
use crate::params::ProblemParams;

/// Signed wavenumber index of FFT slot `idx` for a length-`n` transform:
/// `0, 1, .., n/2 - 1, -n/2, .., -1`.
#[inline]
pub fn signed_index(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Planned forward/inverse transforms of one size. Coefficients follow
/// `a_j = (1/N) sum_i C_i exp(-2 pi i j i / N)`, so `a_0` is the mean.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Inverse transform in place; no scaling (coefficients are already normalized).
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Real field from coefficients, plus the largest discarded imaginary part.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> (Vec<f64>, f64) {
        let mut buf = coeffs.to_vec();
        self.inverse_in_place(&mut buf);
        let max_imag = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        (buf.iter().map(|c| c.re).collect(), max_imag)
    }
}

/// Fourier coefficients of a real periodic field together with its parameters
/// and the simulation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    #[serde(with = "complex_vec")]
    pub coeffs: Vec<Complex64>,
    pub params: ProblemParams,
    pub time: f64,
}

impl SpectralState {
    pub fn from_profile(profile: &Profile, fourier: &Fourier) -> Self {
        Self {
            coeffs: fourier.forward(&profile.values),
            params: profile.params,
            time: 0.0,
        }
    }

    pub fn from_values(values: &[f64], params: ProblemParams, fourier: &Fourier) -> Result<Self> {
        check_grid_size(values.len())?;
        Ok(Self {
            coeffs: fourier.forward(values),
            params,
            time: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn to_profile(&self, fourier: &Fourier) -> Result<Profile> {
        let (values, _) = fourier.inverse_real(&self.coeffs);
        Profile::new(values, self.params)
    }

    /// Largest violation of `a_{-j} = conj(a_j)`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| (self.coeffs[(n - j) % n] - self.coeffs[j].conj()).norm())
            .fold(0.0, f64::max)
    }
}

mod complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}
