use serde::{Deserialize, Serialize};

use super::branch::BranchIndex;
use super::ode::{Dopri5, StepFailure};
use super::residual_reduced;
use crate::error::{Error, Result};
use crate::grid::{check_grid_size, Profile};
use crate::params::ProblemParams;

/// Stopping tolerance on the periodicity defect `|X(L; X0) - X0|`.
pub const SHOOT_TOL: f64 = 1e-10;
/// Number of initial values sampled across the admissible interval.
pub const BRACKET_SAMPLES: usize = 64;
/// Below this value of `min |3 psi^2 - 1|` a solution is flagged near-singular.
pub const NEAR_SINGULAR: f64 = 1e-6;
/// Step budget per trajectory during the root search.
const SEARCH_STEPS: usize = 20_000;

/// `X(eta) = psi^3 - psi` sampled at the grid points and at `eta = L`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub eta: Vec<f64>,
    pub x: Vec<f64>,
}

impl Trajectory {
    pub fn end(&self) -> f64 {
        *self.x.last().expect("trajectory has at least one sample")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSolution {
    pub profile: Profile,
    pub branch: BranchIndex,
    /// Converged initial value `a` with `psi(L; a) = a`.
    pub shoot_root: f64,
    /// Final periodicity defect in `X`.
    pub defect: f64,
    pub regular: bool,
    pub near_singular: bool,
    /// `min |3 psi^2 - 1|` over the grid.
    pub min_abs_s: f64,
}

/// Integrates `D X' = -v (psi_j(X) - <psi>) - f0 sin(k eta)` over one period
/// from `X(0) = x0`, recording `X` at `n` uniform grid points and at `L`.
pub fn integrate_dx(params: &ProblemParams, branch: BranchIndex, x0: f64, n: usize) -> Result<Trajectory> {
    integrate_with(params, branch, x0, n, &Dopri5::default())
}

fn integrate_with(
    params: &ProblemParams,
    branch: BranchIndex,
    x0: f64,
    n: usize,
    ode: &Dopri5,
) -> Result<Trajectory> {
    let p = *params;
    let rhs = move |eta: f64, x: f64| -> Option<f64> {
        let psi = branch.psi(x)?;
        Some((-p.v * (psi - p.mean_psi) - p.forcing(eta)) / p.d_mob)
    };
    if rhs(0.0, x0).is_none() {
        return Err(Error::SingularTrajectory { eta: 0.0 });
    }
    let h_grid = p.l_period / n as f64;
    let mut eta = Vec::with_capacity(n + 1);
    let mut xs = Vec::with_capacity(n + 1);
    eta.push(0.0);
    xs.push(x0);
    let mut x = x0;
    let mut h = h_grid;
    for i in 0..n {
        let t0 = i as f64 * h_grid;
        let t1 = if i + 1 == n { p.l_period } else { (i + 1) as f64 * h_grid };
        x = ode.integrate(&rhs, t0, x, t1, &mut h).map_err(|e| match e {
            StepFailure::Domain { t } => Error::SingularTrajectory { eta: t },
            StepFailure::Underflow { t } => Error::IntegrationFailure {
                eta: t,
                reason: "step size underflow".into(),
            },
            StepFailure::TooManySteps { t } => Error::IntegrationFailure {
                eta: t,
                reason: "step budget exhausted".into(),
            },
        })?;
        eta.push(t1);
        xs.push(x);
    }
    Ok(Trajectory { eta, x: xs })
}

/// Admissible interval of initial values `psi(0)` on `branch`, from the
/// extremum bounds intersected with the branch range. `None` when empty.
fn admissible_interval(params: &ProblemParams, branch: BranchIndex) -> Option<(f64, f64)> {
    let r = if params.v != 0.0 {
        params.f0 / params.v.abs()
    } else {
        f64::INFINITY
    };
    let (blo, bhi) = branch.psi_range();
    let lo = (params.mean_psi - r).max(blo).max(-3.0);
    let hi = (params.mean_psi + r).min(bhi).min(3.0);
    // keep the singular levels out of the sampled set
    let nudge = 1e-9;
    let lo = if lo == blo { lo + nudge } else { lo };
    let hi = if hi == bhi { hi - nudge } else { hi };
    (lo <= hi).then_some((lo, hi))
}

fn defect(params: &ProblemParams, branch: BranchIndex, x0: f64, ode: &Dopri5) -> Option<f64> {
    // only the endpoint matters here, so use a coarse sampling
    integrate_with(params, branch, x0, 8, ode).ok().map(|t| t.end() - x0)
}

/// All periodic solutions on one branch, found by sampling the defect
/// `g(X0) = X(L; X0) - X0` across the admissible interval and refining each
/// sign change with a safeguarded secant/bisection iteration.
pub fn shoot_periodic_all(params: &ProblemParams, branch: BranchIndex, n: usize) -> Result<Vec<ReducedSolution>> {
    params.validate()?;
    check_grid_size(n)?;
    let ode = Dopri5::default();
    // starts that graze the singular edge crawl with tiny steps; the search
    // only needs to classify them, so it works on a step budget
    let search = Dopri5 {
        max_steps: SEARCH_STEPS,
        ..ode
    };
    let (lo, hi) = admissible_interval(params, branch).ok_or(Error::NoPeriodicSolution {
        branch: branch.index(),
    })?;

    let mut roots = Vec::new();
    if hi - lo < 1e-12 {
        let x0 = BranchIndex::to_x(0.5 * (lo + hi));
        match defect(params, branch, x0, &search) {
            Some(g) if g.abs() < SHOOT_TOL => roots.push(x0),
            Some(_) => {}
            None => return Err(Error::SingularOnly { branch: branch.index() }),
        }
    } else {
        let samples: Vec<(f64, Option<f64>)> = (0..BRACKET_SAMPLES)
            .map(|i| {
                let psi0 = lo + (hi - lo) * i as f64 / (BRACKET_SAMPLES - 1) as f64;
                let x0 = BranchIndex::to_x(psi0);
                (x0, defect(params, branch, x0, &search))
            })
            .collect();
        if samples.iter().all(|(_, g)| g.is_none()) {
            return Err(Error::SingularOnly { branch: branch.index() });
        }
        for w in samples.windows(2) {
            let ((xa, ga), (xb, gb)) = (w[0], w[1]);
            match (ga, gb) {
                (Some(ga), _) if ga.abs() < SHOOT_TOL => push_unique(&mut roots, xa),
                (Some(ga), Some(gb)) if ga * gb < 0.0 => {
                    if let Some(x) = refine_root(params, branch, &search, (xa, ga), (xb, gb)) {
                        push_unique(&mut roots, x);
                    }
                }
                // the periodic orbit can sit right next to the edge of the
                // set of non-singular starts, so bracket from that edge too
                (None, Some(gb)) => {
                    if let Some(x) = root_near_edge(params, branch, &search, xa, (xb, gb)) {
                        push_unique(&mut roots, x);
                    }
                }
                (Some(ga), None) => {
                    if let Some(x) = root_near_edge(params, branch, &search, xb, (xa, ga)) {
                        push_unique(&mut roots, x);
                    }
                }
                _ => {}
            }
        }
        if let Some(&(xl, Some(gl))) = samples.last() {
            if gl.abs() < SHOOT_TOL {
                push_unique(&mut roots, xl);
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoPeriodicSolution { branch: branch.index() });
    }
    roots
        .into_iter()
        .map(|x0| build_solution(params, branch, x0, n, &ode))
        .collect()
}

/// Bisects between a singular start `x_bad` and a regular start `x_ok` for
/// the last regular start, then looks for a root between it and `x_ok`.
fn root_near_edge(
    params: &ProblemParams,
    branch: BranchIndex,
    ode: &Dopri5,
    mut x_bad: f64,
    (x_ok, g_ok): (f64, f64),
) -> Option<f64> {
    let mut edge = (x_ok, g_ok);
    for _ in 0..200 {
        let mid = 0.5 * (x_bad + edge.0);
        if mid == x_bad || mid == edge.0 {
            break;
        }
        match defect(params, branch, mid, ode) {
            Some(g) => edge = (mid, g),
            None => x_bad = mid,
        }
    }
    if edge.1.abs() < SHOOT_TOL {
        Some(edge.0)
    } else if edge.1 * g_ok < 0.0 {
        refine_root(params, branch, ode, edge, (x_ok, g_ok))
    } else {
        None
    }
}

fn push_unique(roots: &mut Vec<f64>, x: f64) {
    if roots.iter().all(|r| (r - x).abs() > 1e-8) {
        roots.push(x);
    }
}

/// Periodic solution on one branch. When the branch hosts several, the one
/// with the smallest periodicity defect is returned.
pub fn shoot_periodic(params: &ProblemParams, branch: BranchIndex, n: usize) -> Result<ReducedSolution> {
    let mut all = shoot_periodic_all(params, branch, n)?;
    all.sort_by(|a, b| a.defect.abs().total_cmp(&b.defect.abs()));
    Ok(all.swap_remove(0))
}

/// Tries every branch and returns the regular solutions found. When none
/// exists every trajectory through the admissible starts runs into the
/// singular set, reported as [`Error::SingularOnly`] on the branch that holds
/// the mean. Parameter and grid errors are passed through.
pub fn solve_reduced(params: &ProblemParams, n: usize) -> Result<Vec<ReducedSolution>> {
    params.validate()?;
    check_grid_size(n)?;
    let mut out = Vec::new();
    for b in BranchIndex::ALL {
        match shoot_periodic_all(params, b, n) {
            Ok(sols) => out.extend(sols.into_iter().filter(|s| s.regular)),
            Err(Error::NoPeriodicSolution { .. } | Error::SingularOnly { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        Err(Error::SingularOnly {
            branch: BranchIndex::of_psi(params.mean_psi).index(),
        })
    } else {
        Ok(out)
    }
}

/// Brent-style root refinement: secant or inverse quadratic steps kept inside
/// the bracket, with bisection whenever they stall.
fn refine_root(
    params: &ProblemParams,
    branch: BranchIndex,
    ode: &Dopri5,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
) -> Option<f64> {
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-15;
        let m = 0.5 * (c - b);
        if fb.abs() < SHOOT_TOL || (m.abs() <= tol && fb.abs() < 1e3 * SHOOT_TOL) {
            return Some(b);
        }
        if m.abs() <= tol {
            return (fb.abs() < 1e-8).then_some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = defect(params, branch, b, ode)?;
    }
    None
}

fn build_solution(
    params: &ProblemParams,
    branch: BranchIndex,
    x0: f64,
    n: usize,
    ode: &Dopri5,
) -> Result<ReducedSolution> {
    let traj = integrate_with(params, branch, x0, n, ode)?;
    let values: Vec<f64> = traj.x[..n]
        .iter()
        .map(|&x| branch.psi(x).ok_or(Error::SingularTrajectory { eta: 0.0 }))
        .collect::<Result<_>>()?;
    let min_abs_s = values
        .iter()
        .map(|p| (3.0 * p * p - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let shoot_root = branch.psi(x0).expect("root lies inside the branch domain");
    let profile = Profile::new(values, *params)?;
    let mean_err = (profile.mean() - params.mean_psi).abs();
    let profile = profile.with_mean_tolerance(mean_err.max(1e-12));
    Ok(ReducedSolution {
        profile,
        branch,
        shoot_root,
        defect: traj.end() - x0,
        regular: min_abs_s > 0.0,
        near_singular: min_abs_s < NEAR_SINGULAR,
        min_abs_s,
    })
}

impl ReducedSolution {
    /// Max-norm residual of the reduced equation on the solution's grid.
    pub fn residual(&self) -> f64 {
        residual_reduced(&self.profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::mirror_profile;
    use crate::reduced::BAND_EDGE;

    #[test]
    fn unforced_wave_is_the_mean() {
        let prm = ProblemParams::new(0.7, 0.0, 1.0);
        let sols = solve_reduced(&prm, 64).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].branch.index(), 0);
        assert!(sols[0].profile.values.iter().all(|&p| (p - 0.7).abs() < 1e-12));
    }

    #[test]
    fn moderate_forcing_gives_a_smooth_wave() {
        let prm = ProblemParams::new(0.7, 0.12, 1.0);
        let sol = shoot_periodic(&prm, BranchIndex::new(0).unwrap(), 512).unwrap();
        assert!(sol.regular && !sol.near_singular);
        assert!(sol.defect.abs() < SHOOT_TOL);
        assert!(sol.residual() < 1e-6);
        assert!((sol.profile.mean() - 0.7).abs() < 1e-6);
        let traj = integrate_dx(&prm, sol.branch, BranchIndex::to_x(sol.shoot_root), 512).unwrap();
        assert!(traj.x.iter().all(|&x| x > -BAND_EDGE));
    }

    #[test]
    fn cusp_threshold_separates_regular_from_singular() {
        let below = solve_reduced(&ProblemParams::new(0.7, 0.239, 1.0), 256).unwrap();
        assert!(below[0].min_abs_s < 0.02);
        let above = solve_reduced(&ProblemParams::new(0.7, 0.25, 1.0), 256);
        assert!(matches!(above, Err(Error::SingularOnly { branch: 0 })), "{above:?}");
    }

    #[test]
    fn strong_forcing_has_no_regular_wave() {
        let r = solve_reduced(&ProblemParams::new(0.7, 1.0, 1.0), 128);
        assert!(matches!(r, Err(Error::SingularOnly { .. })));
    }

    #[test]
    fn negative_mean_is_the_mirror_image() {
        let n = 256;
        let plus = solve_reduced(&ProblemParams::new(0.7, 0.12, 1.0), n).unwrap();
        let minus = solve_reduced(&ProblemParams::new(-0.7, 0.12, 1.0), n).unwrap();
        assert_eq!(plus[0].branch.index(), 0);
        assert_eq!(minus[0].branch.index(), 2);
        let mirrored = mirror_profile(&plus[0].profile);
        assert!(mirrored.unwrap().max_distance(&minus[0].profile) < 1e-8);
    }

    #[test]
    fn central_branch_wave_inside_the_spinodal() {
        // Case 1 wedge: <psi> - r > -1/sqrt 3 and <psi> + r < 1/sqrt 3
        let prm = ProblemParams::new(0.1, 0.2, 1.0);
        let sols = solve_reduced(&prm, 128).unwrap();
        assert!(sols.iter().any(|s| s.branch.index() == 1));
    }
}
