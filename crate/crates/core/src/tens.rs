//! Time-dependent simulation in the co-moving frame,
//!
//! `C_t = v C_eta + D (C^3 - C)_etaeta - eps D C_etaetaetaeta + f0 k cos(k eta)`,
//!
//! with a pseudospectral semi-implicit backward-Euler scheme: the nonlinear
//! term is explicit, advection and the fourth-order term are implicit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_grid_size, Profile};
use crate::params::ProblemParams;
use crate::spectral::{signed_index, Fourier, SpectralState};

/// Coefficients above this magnitude count as a blow-up.
const BLOW_UP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensConfig {
    /// Grid points, equal to the number of Fourier modes.
    pub n_modes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    /// Half-width of the uniform random perturbation of the initial state.
    pub init_amplitude: f64,
    /// Max-norm change per unit time below which the field counts as steady.
    pub steady_tol: f64,
    /// The change rate must stay below `steady_tol` for this long.
    pub steady_window: f64,
    /// Stop as soon as a steady state is declared.
    pub stop_when_steady: bool,
    /// Store the field every `snapshot_every` time units.
    pub snapshot_every: Option<f64>,
}

impl Default for TensConfig {
    fn default() -> Self {
        Self {
            n_modes: 256,
            dt: 1e-4,
            t_final: 10.0,
            seed: 0,
            init_amplitude: 0.1,
            steady_tol: 1e-6,
            steady_window: 1.0,
            stop_when_steady: true,
            snapshot_every: None,
        }
    }
}

impl TensConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid_size(self.n_modes)?;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.dt) || !positive(self.t_final) {
            return Err(Error::InvalidParams(format!(
                "dt and t_final must be positive, got {} and {}",
                self.dt, self.t_final
            )));
        }
        if !(self.init_amplitude >= 0.0) || !positive(self.steady_tol) || !(self.steady_window >= 0.0) {
            return Err(Error::InvalidParams("invalid TENS tolerances".into()));
        }
        if let Some(s) = self.snapshot_every {
            if !positive(s) {
                return Err(Error::InvalidParams(format!("snapshot interval must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Profile(Profile),
    /// `<psi> + r(eta)` with `r` i.i.d. uniform in `[-a, a]`, re-centred so
    /// the sample mean is exactly `<psi>`.
    Random,
}

/// Max-norm change per unit time of the field at one sampled time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySample {
    pub time: f64,
    pub change_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensResult {
    pub final_profile: Profile,
    pub final_time: f64,
    pub steps: usize,
    pub history: Vec<HistorySample>,
    pub snapshots: Vec<Snapshot>,
    pub steady: bool,
    /// Time at which the steady window was completed.
    pub steady_time: Option<f64>,
    /// `|<C>(t_final) - <C>(0)|`.
    pub mean_drift: f64,
    /// Largest imaginary part discarded by an inverse transform.
    pub max_imag: f64,
    pub seed: u64,
}

/// Precomputed step operator for one parameter set and grid.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub params: ProblemParams,
    pub dt: f64,
    fourier: Fourier,
    /// `1 / (1 + eps D dt q^4 - i v q dt)`
    inv_denom: Vec<Complex64>,
    /// `dt D q^2`
    diffusion: Vec<f64>,
    /// `dt f0 k / 2` on `j = +-1`
    forcing: f64,
}

impl Stepper {
    pub fn new(params: &ProblemParams, n: usize, dt: f64) -> Result<Self> {
        params.validate()?;
        check_grid_size(n)?;
        if !(params.eps > 0.0) {
            return Err(Error::InvalidParams("time stepping needs eps > 0".into()));
        }
        let p = *params;
        let mut inv_denom = Vec::with_capacity(n);
        let mut diffusion = Vec::with_capacity(n);
        for idx in 0..n {
            let q = 2.0 * PI * signed_index(idx, n) as f64 / p.l_period;
            // odd derivative on the Nyquist mode is dropped to keep fields real
            let q_odd = if 2 * idx == n { 0.0 } else { q };
            let denom = Complex64::new(1.0 + p.eps * p.d_mob * dt * q.powi(4), -p.v * q_odd * dt);
            inv_denom.push(denom.inv());
            diffusion.push(dt * p.d_mob * q * q);
        }
        Ok(Self {
            params: p,
            dt,
            fourier: Fourier::new(n),
            inv_denom,
            diffusion,
            forcing: 0.5 * dt * p.f0 * p.k_wave,
        })
    }

    pub fn n(&self) -> usize {
        self.inv_denom.len()
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    /// Advances the coefficients by one step in place and returns the real
    /// field at the start of the step together with the largest imaginary
    /// part discarded from it.
    pub fn advance(&self, coeffs: &mut [Complex64]) -> (Vec<f64>, f64) {
        let n = self.n();
        let mut buf = coeffs.to_vec();
        self.fourier.inverse_in_place(&mut buf);
        let max_imag = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let field: Vec<f64> = buf.iter().map(|c| c.re).collect();
        for (b, &c) in buf.iter_mut().zip(&field) {
            *b = Complex64::new(c * c * c - c, 0.0);
        }
        self.fourier.forward_in_place(&mut buf);
        for j in 0..n {
            let mut rhs = coeffs[j] - buf[j] * self.diffusion[j];
            if j == 1 || j == n - 1 {
                rhs += self.forcing;
            }
            coeffs[j] = rhs * self.inv_denom[j];
        }
        (field, max_imag)
    }
}

/// One step of the scheme. `time` advances by `cfg.dt`.
pub fn step(state: &SpectralState, cfg: &TensConfig) -> Result<SpectralState> {
    let stepper = Stepper::new(&state.params, state.n(), cfg.dt)?;
    let mut next = state.clone();
    stepper.advance(&mut next.coeffs);
    next.time += cfg.dt;
    check_finite(&next.coeffs, next.time)?;
    Ok(next)
}

fn check_finite(coeffs: &[Complex64], time: f64) -> Result<()> {
    if coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite() && c.norm() < BLOW_UP) {
        Ok(())
    } else {
        Err(Error::BlowUp { time })
    }
}

/// Random initial field `<psi> + r` with zero-mean `r` drawn from a seeded
/// ChaCha generator.
pub fn random_initial(params: &ProblemParams, n: usize, amplitude: f64, seed: u64) -> Result<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
    let m = r.iter().sum::<f64>() / n as f64;
    r.iter_mut().for_each(|x| *x += params.mean_psi - m);
    Profile::new(r, *params)
}

/// Runs the simulation from `initial` up to `cfg.t_final`, or until steady
/// when `cfg.stop_when_steady` is set.
pub fn run(params: &ProblemParams, cfg: &TensConfig, initial: &InitialCondition) -> Result<TensResult> {
    cfg.validate()?;
    let n = cfg.n_modes;
    let stepper = Stepper::new(params, n, cfg.dt)?;
    let init = match initial {
        InitialCondition::Profile(p) => {
            if p.n_points() != n {
                return Err(Error::InvalidGrid(format!(
                    "initial profile has {} points, expected {n}",
                    p.n_points()
                )));
            }
            p.clone()
        }
        InitialCondition::Random => random_initial(params, n, cfg.init_amplitude, cfg.seed)?,
    };
    let mut coeffs = stepper.fourier().forward(&init.values);
    let mean0 = coeffs[0].re;

    let total_steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;
    let history_every = ((0.01 / cfg.dt).round() as usize).max(1);
    let snap_every = cfg.snapshot_every.map(|s| ((s / cfg.dt).round() as usize).max(1));
    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut max_imag: f64 = 0.0;
    let mut quiet_since: Option<f64> = None;
    let mut steady_time = None;
    let mut prev: Option<Vec<f64>> = None;
    let mut steps = 0;
    let mut time = 0.0;

    while steps < total_steps {
        let (field, imag) = stepper.advance(&mut coeffs);
        max_imag = max_imag.max(imag);
        if let (Some(every), Some(p)) = (snap_every, &prev) {
            if (steps - 1) % every == 0 {
                snapshots.push(Snapshot {
                    time,
                    values: p.clone(),
                });
            }
        }
        if let Some(p) = &prev {
            let rate = field
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / cfg.dt;
            if (steps - 1) % history_every == 0 {
                history.push(HistorySample { time, change_rate: rate });
            }
            if rate < cfg.steady_tol {
                let since = *quiet_since.get_or_insert(time);
                if steady_time.is_none() && time - since >= cfg.steady_window {
                    steady_time = Some(time);
                }
            } else {
                quiet_since = None;
                steady_time = None;
            }
        }
        prev = Some(field);
        steps += 1;
        time = steps as f64 * cfg.dt;
        check_finite(&coeffs, time)?;
        if cfg.stop_when_steady && steady_time.is_some() {
            break;
        }
    }

    let (values, imag) = stepper.fourier().inverse_real(&coeffs);
    max_imag = max_imag.max(imag);
    if snap_every.is_some() {
        snapshots.push(Snapshot {
            time,
            values: values.clone(),
        });
    }
    let final_profile = Profile::new(values, *params)?.with_mean_tolerance(1e-10);
    Ok(TensResult {
        final_profile,
        final_time: time,
        steps,
        history,
        snapshots,
        steady: steady_time.is_some(),
        steady_time,
        mean_drift: (coeffs[0].re - mean0).abs(),
        max_imag,
        seed: cfg.seed,
    })
}
