use serde::{Deserialize, Serialize};

use super::{parallel_map, ScanAxes};
use crate::cases::{classify_case, Case, CaseLabel};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::reduced::{solve_reduced, ReducedSolution};
use crate::stability::{compute_spectrum, StabilityOptions, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedScanConfig {
    pub v: f64,
    /// Grid points of each reduced solution.
    pub n: usize,
    /// Also compute the `eps = 0` spectrum and the analytic bounds of the
    /// regular wave in every cell.
    pub stability: bool,
    pub jobs: usize,
}

impl Default for ReducedScanConfig {
    fn default() -> Self {
        Self {
            v: 1.0,
            n: 256,
            stability: false,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedCell {
    pub mean_psi: f64,
    pub f0: f64,
    pub regular: bool,
    /// Branches holding a regular periodic solution.
    pub branches: Vec<usize>,
    pub case: CaseLabel,
    /// `min |3 psi^2 - 1|` of the analysed wave.
    pub min_abs_s: Option<f64>,
    pub max_re: Option<f64>,
    pub verdict: Option<Verdict>,
    pub stable_bound: Option<bool>,
    pub unstable_bound: Option<bool>,
    /// Failure other than a singular or missing solution.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedMap {
    pub axes: ScanAxes,
    pub config: ReducedScanConfig,
    pub cells: Vec<ReducedCell>,
}

/// Regular/singular map of the reduced model. Failures are recorded per cell
/// and never stop the scan.
pub fn scan_reduced(axes: &ScanAxes, cfg: &ReducedScanConfig) -> Result<ReducedMap> {
    axes.validate()?;
    if cfg.v == 0.0 || !cfg.v.is_finite() {
        return Err(Error::InvalidParams("the reduced scan needs v != 0".into()));
    }
    let points: Vec<(f64, f64)> = axes
        .mean
        .values()
        .into_iter()
        .flat_map(|m| axes.f0.values().into_iter().map(move |f| (m, f)))
        .collect();
    let cells = parallel_map(&points, cfg.jobs, |&(m, f0)| reduced_cell(m, f0, cfg));
    Ok(ReducedMap {
        axes: *axes,
        config: *cfg,
        cells,
    })
}

fn reduced_cell(mean_psi: f64, f0: f64, cfg: &ReducedScanConfig) -> ReducedCell {
    let params = ProblemParams::new(mean_psi, f0, cfg.v);
    let case = classify_case(&params);
    let mut cell = ReducedCell {
        mean_psi,
        f0,
        regular: false,
        branches: Vec::new(),
        case: case.clone(),
        min_abs_s: None,
        max_re: None,
        verdict: None,
        stable_bound: None,
        unstable_bound: None,
        error: None,
    };
    let sols = match solve_reduced(&params, cfg.n) {
        Ok(s) => s,
        Err(Error::SingularOnly { .. }) => return cell,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    cell.regular = true;
    cell.branches = sols.iter().map(|s| s.branch.index()).collect();
    cell.branches.sort_unstable();
    cell.branches.dedup();
    let wave = pick_wave(&sols, case.case);
    cell.min_abs_s = Some(wave.min_abs_s);
    if cfg.stability {
        match compute_spectrum(&wave.profile, 0.0, &StabilityOptions::default()) {
            Ok(rep) => {
                cell.max_re = Some(rep.max_re);
                cell.verdict = Some(rep.verdict);
                cell.stable_bound = Some(rep.analytic_stable_bound);
                cell.unstable_bound = Some(rep.analytic_unstable_bound);
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    cell
}

/// The solution on the branch named by the case if there is one.
fn pick_wave(sols: &[ReducedSolution], case: Case) -> &ReducedSolution {
    case.branch()
        .and_then(|b| sols.iter().find(|s| s.branch.index() == b))
        .unwrap_or(&sols[0])
}

impl ReducedMap {
    pub fn cell(&self, i_mean: usize, i_f0: usize) -> &ReducedCell {
        &self.cells[self.axes.index(i_mean, i_f0)]
    }

    /// Cells inside one of the case wedges without a regular solution.
    pub fn wedge_violations(&self) -> Vec<&ReducedCell> {
        self.cells
            .iter()
            .filter(|c| c.case.case != Case::NoCase && !c.regular)
            .collect()
    }

    /// Cells whose spectral verdict contradicts a satisfied analytic bound.
    pub fn bound_counterexamples(&self) -> Vec<&ReducedCell> {
        self.cells
            .iter()
            .filter(|c| {
                let stable_bad = c.stable_bound == Some(true) && c.verdict != Some(Verdict::Stable);
                let unstable_bad = c.unstable_bound == Some(true) && c.verdict != Some(Verdict::Unstable);
                stable_bad || unstable_bad
            })
            .collect()
    }

    /// Pairs of cells at `+<psi>` and `-<psi>` (both on the grid) that
    /// disagree on regularity or whose branches are not mirror images
    /// (`j -> 2 - j`).
    pub fn mirror_mismatches(&self) -> Vec<(&ReducedCell, &ReducedCell)> {
        let means = self.axes.mean.values();
        let nf = self.axes.f0.len();
        let mut out = Vec::new();
        for (i, &m) in means.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            let Some(j) = means.iter().position(|&x| (x + m).abs() < 1e-9) else {
                continue;
            };
            for k in 0..nf {
                let a = self.cell(i, k);
                let b = self.cell(j, k);
                let mut mirrored: Vec<usize> = b.branches.iter().map(|&x| 2 - x).collect();
                mirrored.sort_unstable();
                if a.regular != b.regular || a.branches != mirrored {
                    out.push((a, b));
                }
            }
        }
        out
    }
}
