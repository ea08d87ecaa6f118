//! Parameter-space scans over `(<psi>, f0)`.
//!
//! [`scan_reduced`] maps where the reduced model has a regular periodic
//! solution (and, optionally, how the reduced waves fare spectrally against
//! the analytic bounds). [`scan_full`] solves the full model from each guess
//! family in every cell, classifies the cell by which waves are stable, and
//! [`trace_neutral_curve`] refines the stability boundary of one family by
//! bisection in `f0`.

mod export;
mod flow;
mod neutral;
mod reduced_map;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::{flow_map_table, neutral_curve_table, reduced_map_table};
pub use flow::{scan_full, Classification, FlowMap, FullScanConfig, ModeResult, ScanCell, TensCheck};
pub use neutral::{trace_neutral_curve, NeutralCurve, NeutralPoint};
pub use reduced_map::{scan_reduced, ReducedCell, ReducedMap, ReducedScanConfig};

/// Uniformly spaced samples `start, start + step, ..` up to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite() && self.stop.is_finite() && self.step > 0.0 && self.stop >= self.start;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid axis {self:?}")))
        }
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Samples rounded to 12 decimals so that e.g. `0.15` prints as such.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// The `(<psi>, f0)` grid of a scan. Cells are ordered mean-major:
/// index `i_mean * f0.len() + i_f0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAxes {
    pub mean: Axis,
    pub f0: Axis,
}

impl ScanAxes {
    pub fn new(mean: Axis, f0: Axis) -> Self {
        Self { mean, f0 }
    }

    /// `<psi>` in `[0, 1]` and `f0` in `[0, 2]`, both with step 0.05.
    pub fn default_grid() -> Self {
        Self::new(Axis::new(0.0, 1.0, 0.05), Axis::new(0.0, 2.0, 0.05))
    }

    pub fn validate(&self) -> Result<()> {
        self.mean.validate()?;
        self.f0.validate()?;
        if self.f0.start < 0.0 {
            return Err(Error::InvalidParams("f0 axis must be non-negative".into()));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.mean.len() * self.f0.len()
    }

    pub fn index(&self, i_mean: usize, i_f0: usize) -> usize {
        i_mean * self.f0.len() + i_f0
    }
}

impl Default for ScanAxes {
    fn default() -> Self {
        Self::default_grid()
    }
}

/// Runs `f` over `items` on at most `jobs` threads; results keep the input
/// order.
pub(crate) fn parallel_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_samples() {
        let a = Axis::new(0.0, 1.0, 0.05);
        assert_eq!(a.len(), 21);
        let v = a.values();
        assert_eq!(v[3], 0.15);
        assert_eq!(*v.last().unwrap(), 1.0);
        assert_eq!(Axis::new(0.0, 2.0, 0.1).len(), 21);
        assert_eq!(Axis::new(0.5, 0.5, 0.1).values(), vec![0.5]);
        assert!(Axis::new(1.0, 0.0, 0.1).validate().is_err());
        assert!(Axis::new(0.0, 1.0, 0.0).validate().is_err());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        let out = parallel_map(&items, 3, |&i| i * i);
        assert_eq!(out, items.iter().map(|i| i * i).collect::<Vec<_>>());
    }
}
