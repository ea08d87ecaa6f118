//! Periodic derivative operators on a uniform grid.
//!
//! Two discretizations are provided: fourth-order central finite-difference
//! stencils with circular wrap, and Fourier (spectral) differentiation. Both
//! can be applied to vectors or assembled into dense matrices.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{signed_index, Fourier};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    #[default]
    FiniteDifference4,
    Spectral,
}

/// Fourth-order central stencil for the derivative of the given order, as
/// `(offset, weight)` pairs before division by `h^order`.
fn fd4_stencil(order: u8) -> &'static [(i64, f64)] {
    const D1: [(i64, f64); 4] = [(-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)];
    const D2: [(i64, f64); 5] = [
        (-2, -1.0 / 12.0),
        (-1, 4.0 / 3.0),
        (0, -5.0 / 2.0),
        (1, 4.0 / 3.0),
        (2, -1.0 / 12.0),
    ];
    const D3: [(i64, f64); 6] = [
        (-3, 1.0 / 8.0),
        (-2, -1.0),
        (-1, 13.0 / 8.0),
        (1, -13.0 / 8.0),
        (2, 1.0),
        (3, -1.0 / 8.0),
    ];
    const D4: [(i64, f64); 7] = [
        (-3, -1.0 / 6.0),
        (-2, 2.0),
        (-1, -13.0 / 2.0),
        (0, 28.0 / 3.0),
        (1, -13.0 / 2.0),
        (2, 2.0),
        (3, -1.0 / 6.0),
    ];
    match order {
        1 => &D1,
        2 => &D2,
        3 => &D3,
        4 => &D4,
        _ => panic!("no fourth-order stencil for derivative order {order}"),
    }
}

/// Fourth-order finite-difference derivative with periodic wrap.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOperator {
    pub order: u8,
    pub n: usize,
    pub h: f64,
    weights: Vec<(i64, f64)>,
}

impl PeriodicOperator {
    /// # Panics
    /// If `order` is not in `1..=4`.
    pub fn new(order: u8, n: usize, l_period: f64) -> Self {
        let h = l_period / n as f64;
        let scale = h.powi(order as i32);
        let weights = fd4_stencil(order).iter().map(|&(o, w)| (o, w / scale)).collect();
        Self { order, n, h, weights }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n as i64;
        debug_assert_eq!(u.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .weights
                .iter()
                .map(|&(off, w)| w * u[(i as i64 + off).rem_euclid(n) as usize])
                .sum();
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.n as i64;
        let mut m = Mat::<f64>::zeros(self.n, self.n);
        for i in 0..n {
            for &(off, w) in &self.weights {
                let j = (i + off).rem_euclid(n) as usize;
                m[(i as usize, j)] += w;
            }
        }
        m
    }

    /// Eigenvalue of the circulant operator on the Fourier mode with signed index `j`.
    pub fn symbol(&self, j: i64) -> Complex64 {
        let theta = 2.0 * PI * j as f64 / self.n as f64;
        self.weights
            .iter()
            .map(|&(off, w)| w * Complex64::from_polar(1.0, theta * off as f64))
            .sum()
    }
}

/// Fourier symbol `(i (q_m + theta))^order` of mode slot `idx`. The Nyquist
/// slot of an odd-order derivative is zeroed when `theta == 0` so real fields
/// stay real.
fn spectral_symbol(order: u8, idx: usize, n: usize, l_period: f64, theta: f64) -> Complex64 {
    let m = signed_index(idx, n);
    if theta == 0.0 && order % 2 == 1 && 2 * idx == n {
        return Complex64::new(0.0, 0.0);
    }
    let q = 2.0 * PI * m as f64 / l_period + theta;
    Complex64::new(0.0, q).powi(order as i32)
}

/// Dense spectral differentiation matrix acting on grid values of the
/// periodic factor of a Bloch function `exp(i theta eta) u(eta)`.
pub fn spectral_matrix_complex(order: u8, n: usize, l_period: f64, theta: f64) -> Mat<Complex64> {
    let fourier = Fourier::new(n);
    let mut col: Vec<Complex64> = (0..n)
        .map(|idx| spectral_symbol(order, idx, n, l_period, theta))
        .collect();
    fourier.inverse_in_place(&mut col);
    let scale = 1.0 / n as f64;
    Mat::from_fn(n, n, |i, j| col[(i + n - j) % n] * scale)
}

/// Real spectral differentiation matrix (`theta = 0`).
pub fn spectral_matrix(order: u8, n: usize, l_period: f64) -> Mat<f64> {
    let c = spectral_matrix_complex(order, n, l_period, 0.0);
    Mat::from_fn(n, n, |i, j| c[(i, j)].re)
}

/// Dense derivative matrix for the chosen discretization.
pub fn derivative_matrix(scheme: Discretization, order: u8, n: usize, l_period: f64) -> Mat<f64> {
    match scheme {
        Discretization::FiniteDifference4 => PeriodicOperator::new(order, n, l_period).to_dense(),
        Discretization::Spectral => spectral_matrix(order, n, l_period),
    }
}

/// Finite-difference operator with its stencil shifted for Bloch wavenumber
/// `theta`: acting on `u` it returns the periodic factor of
/// `d^k/deta^k [exp(i theta eta) u]`, i.e. `exp(-i theta eta) D exp(i theta eta) u`.
pub fn fd_bloch_matrix(order: u8, n: usize, l_period: f64, theta: f64) -> Mat<Complex64> {
    let op = PeriodicOperator::new(order, n, l_period);
    let h = op.h;
    let nn = n as i64;
    let mut m = Mat::<Complex64>::zeros(n, n);
    for i in 0..nn {
        for &(off, w) in &op.weights {
            let j = (i + off).rem_euclid(nn) as usize;
            m[(i as usize, j)] += Complex64::from_polar(w, theta * off as f64 * h);
        }
    }
    m
}

pub(crate) fn matvec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    for j in 0..m.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = m.col_as_slice(j);
        for (o, &a) in out.iter_mut().zip(col) {
            *o += a * xj;
        }
    }
    out
}
