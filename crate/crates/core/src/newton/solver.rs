use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::guess::{guess_for, matches_family, GuessKind};
use super::system::{Model, WaveSystem};
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::operators::{matvec, Discretization};
use crate::params::ProblemParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Stop once `f = F.F / 2` falls below this value.
    pub tol_residual: f64,
    pub max_outer: usize,
    /// Sufficient-decrease constant `c` of the backtracking test.
    pub c_armijo: f64,
    /// Step shrink factor `rho`.
    pub rho_backtrack: f64,
    pub min_alpha: f64,
    pub discretization: Discretization,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-12,
            max_outer: 200,
            c_armijo: 1e-4,
            rho_backtrack: 0.5,
            min_alpha: 1e-10,
            discretization: Discretization::FiniteDifference4,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol_residual > 0.0
            && self.c_armijo > 0.0
            && self.c_armijo < 1.0
            && self.rho_backtrack > 0.0
            && self.rho_backtrack < 1.0
            && self.min_alpha > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid Newton configuration {self:?}")))
        }
    }
}

/// A converged travelling wave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravellingWave {
    pub profile: Profile,
    pub model: Model,
    pub guess_kind: GuessKind,
    /// Grid points by which the guess was rotated before the solve.
    #[serde(default)]
    pub guess_shift: usize,
    pub discretization: Discretization,
    /// Outer Newton iterations taken.
    pub iterations: usize,
    /// `f = F.F / 2` at the returned profile.
    pub final_residual: f64,
    /// `f` at the start of every outer iteration, then at the solution.
    pub history: Vec<f64>,
    /// Step lengths `alpha_k` accepted by the line search.
    pub alphas: Vec<f64>,
}

impl TravellingWave {
    pub fn params(&self) -> &ProblemParams {
        &self.profile.params
    }
}

fn half_norm_sq(f: &[f64]) -> f64 {
    0.5 * f.iter().map(|x| x * x).sum::<f64>()
}

/// Newton iteration `psi <- psi + alpha dpsi`, `dpsi = -J^{-1} F(psi)`, with
/// backtracking: `alpha` starts at one and is multiplied by `rho` while
/// `f(psi + alpha dpsi) > f(psi) + c alpha (grad f . dpsi)`.
pub fn newton_linesearch(
    guess: &[f64],
    params: &ProblemParams,
    model: Model,
    cfg: &NewtonConfig,
    guess_kind: GuessKind,
) -> Result<TravellingWave> {
    if guess.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("initial guess is not finite".into()));
    }
    check_setup(params, model, cfg, guess.len())?;
    let system = WaveSystem::new(params, model, cfg.discretization, guess.len())?;
    solve_system(&system, guess, cfg, guess_kind)
}

fn check_setup(params: &ProblemParams, model: Model, cfg: &NewtonConfig, n: usize) -> Result<()> {
    cfg.validate()?;
    if model == Model::Full && params.eps <= 5e-4 && n < 64 {
        return Err(Error::InvalidGrid(format!(
            "N = {n} cannot resolve interfaces at eps = {}",
            params.eps
        )));
    }
    Ok(())
}

/// Number of guess rotations tried by [`solve_wave`], spaced `L / PHASE_TRIALS`.
pub const PHASE_TRIALS: usize = 16;

/// Newton solve from a named guess family. The phase of a forced wave is
/// pinned by the forcing while the guesses are built at a fixed phase, so the
/// guess is rotated by multiples of `L / 16` (nearest first: 0, +1, -1, +2, ..)
/// until a solve converges. For spike families a converged wave with the
/// expected number of spikes is preferred over one without; if no rotation
/// converges the error of the unrotated attempt is returned.
pub fn solve_wave(
    params: &ProblemParams,
    model: Model,
    kind: GuessKind,
    n: usize,
    cfg: &NewtonConfig,
) -> Result<TravellingWave> {
    solve_wave_phases(params, model, kind, n, cfg, PHASE_TRIALS)
}

/// [`solve_wave`] limited to the first `trials` rotations of the sequence.
pub fn solve_wave_phases(
    params: &ProblemParams,
    model: Model,
    kind: GuessKind,
    n: usize,
    cfg: &NewtonConfig,
    trials: usize,
) -> Result<TravellingWave> {
    check_setup(params, model, cfg, n)?;
    let guess = guess_for(kind, params, n)?;
    let step = n / PHASE_TRIALS;
    let system = WaveSystem::new(params, model, cfg.discretization, n)?;
    let mut first_error = None;
    let mut fallback = None;
    for t in 0..trials.clamp(1, PHASE_TRIALS) {
        // 0, +1, -1, +2, -2, ...
        let m = (t + 1) / 2;
        let shift = if t % 2 == 1 { m * step } else { (n - m * step) % n };
        let values: Vec<f64> = (0..n).map(|i| guess.values[(i + shift) % n]).collect();
        match solve_system(&system, &values, cfg, kind) {
            Ok(mut w) => {
                w.guess_shift = shift;
                if kind.spikes().is_none() || matches_family(kind, &w.profile.values) {
                    return Ok(w);
                }
                fallback.get_or_insert(w);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    fallback.ok_or_else(|| first_error.expect("at least one attempt was made"))
}

pub(crate) fn solve_system(
    system: &WaveSystem,
    guess: &[f64],
    cfg: &NewtonConfig,
    guess_kind: GuessKind,
) -> Result<TravellingWave> {
    let n = system.n();
    let mut psi = guess.to_vec();
    let mut f_vec = system.residual(&psi);
    let mut f = half_norm_sq(&f_vec);
    let mut history = Vec::new();
    let mut alphas = Vec::new();

    for iteration in 0..=cfg.max_outer {
        history.push(f);
        if !f.is_finite() {
            return Err(Error::NoConvergence {
                iterations: iteration,
                residual: f,
            });
        }
        if f < cfg.tol_residual {
            let profile = Profile::new(psi, system.params)?.with_mean_tolerance(1e-8);
            return Ok(TravellingWave {
                profile,
                model: system.model,
                guess_kind,
                guess_shift: 0,
                discretization: system.scheme,
                iterations: iteration,
                final_residual: f,
                history,
                alphas,
            });
        }
        if iteration == cfg.max_outer {
            break;
        }

        let jac = system.jacobian(&psi);
        let step = newton_direction(&jac, &f_vec).ok_or(Error::JacobianSingular { iteration })?;

        // grad f = J^T F, so grad f . dpsi = F . (J dpsi)
        let j_step = matvec(&jac, &step);
        let slope: f64 = f_vec.iter().zip(&j_step).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            return Err(Error::LineSearchStalled {
                iteration,
                alpha: 1.0,
                residual: f,
            });
        }

        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = (0..n).map(|i| psi[i] + alpha * step[i]).collect();
            let trial_f_vec = system.residual(&trial);
            let trial_f = half_norm_sq(&trial_f_vec);
            if trial_f.is_finite() && trial_f <= f + cfg.c_armijo * alpha * slope {
                psi = trial;
                f_vec = trial_f_vec;
                f = trial_f;
                alphas.push(alpha);
                break;
            }
            alpha *= cfg.rho_backtrack;
            if alpha < cfg.min_alpha {
                return Err(Error::LineSearchStalled {
                    iteration,
                    alpha,
                    residual: f,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_outer,
        residual: f,
    })
}

fn newton_direction(jac: &Mat<f64>, f: &[f64]) -> Option<Vec<f64>> {
    let n = f.len();
    let lu = jac.partial_piv_lu();
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| -f[i]);
    let x = lu.solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) && !lu_is_singular(&lu) {
        Some(out)
    } else {
        None
    }
}

fn lu_is_singular(lu: &faer::linalg::solvers::PartialPivLu<f64>) -> bool {
    // pivot growth check on the U diagonal
    let u = lu.U();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    max == 0.0 || min <= max * 1e-14
}
