use std::fmt;

use serde::{Deserialize, Serialize};

use super::neutral::NeutralCurve;
use super::{parallel_map, ScanAxes};
use crate::cases::{classify_case, CaseLabel};
use crate::error::{Error, Result};
use crate::newton::{
    count_spikes, matches_family, newton_linesearch, solve_wave_phases, GuessKind, Model, NewtonConfig,
    TravellingWave, SPIKE_RANGE,
};
use crate::params::ProblemParams;
use crate::reduced::solve_reduced;
use crate::stability::{compute_spectrum, StabilityOptions, TOL_MARGINAL};
use crate::tens::{self, InitialCondition, TensConfig};

/// Random-start simulations on a decimated subgrid: every `stride`-th mean
/// and every `stride`-th forcing value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensCheck {
    pub stride: usize,
    /// `seed` is offset by the cell index.
    pub config: TensConfig,
}

impl Default for TensCheck {
    fn default() -> Self {
        Self {
            stride: 4,
            config: TensConfig {
                n_modes: 128,
                ..TensConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullScanConfig {
    pub v: f64,
    pub eps: f64,
    pub n: usize,
    pub modes: Vec<GuessKind>,
    pub newton: NewtonConfig,
    /// Guess rotations tried for a fresh (non-continued) solve.
    pub phase_trials: usize,
    /// Once continuation has lost a family, fresh solves stop after this many
    /// consecutive failures in the column.
    pub max_fresh_failures: usize,
    /// Also solve the reduced model in every cell.
    pub reduced: bool,
    pub tens: Option<TensCheck>,
    pub jobs: usize,
}

impl Default for FullScanConfig {
    fn default() -> Self {
        Self {
            v: 1.0,
            eps: 5e-4,
            n: 128,
            modes: vec![GuessKind::A1, GuessKind::A2, GuessKind::A3],
            newton: NewtonConfig::default(),
            phase_trials: 4,
            max_fresh_failures: 2,
            reduced: true,
            tens: Some(TensCheck::default()),
            jobs: 1,
        }
    }
}

/// Outcome of one guess family in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub kind: GuessKind,
    pub converged: bool,
    /// The converged wave has the shape of its family.
    pub in_family: bool,
    /// Reached by continuation from the neighbouring cell.
    pub continued: bool,
    pub iterations: usize,
    pub spikes: usize,
    pub max_re: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wave: Option<Vec<f64>>,
}

impl ModeResult {
    fn failed(kind: GuessKind, error: Option<String>) -> Self {
        Self {
            kind,
            converged: false,
            in_family: false,
            continued: false,
            iterations: 0,
            spikes: 0,
            max_re: None,
            error,
            wave: None,
        }
    }

    /// Converged inside its family with every eigenvalue in the left half plane.
    pub fn is_stable(&self) -> bool {
        self.converged && self.in_family && self.max_re.is_some_and(|r| r < -TOL_MARGINAL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "A1_stable")]
    A1Stable,
    #[serde(rename = "A2_stable")]
    A2Stable,
    #[serde(rename = "A1A2_both")]
    A1A2Both,
    NoStableWave,
    /// No family converged at all.
    Unresolved,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::A1Stable => "A1_stable",
            Classification::A2Stable => "A2_stable",
            Classification::A1A2Both => "A1A2_both",
            Classification::NoStableWave => "NoStableWave",
            Classification::Unresolved => "Unresolved",
        };
        f.write_str(s)
    }
}

impl Classification {
    /// Classification from the family results. Only `A1` and `A2` name a
    /// label; a stable wave of another family still rules out `Unresolved`.
    pub fn from_results(results: &[ModeResult]) -> Self {
        let stable = |k: GuessKind| results.iter().any(|r| r.kind == k && r.is_stable());
        match (stable(GuessKind::A1), stable(GuessKind::A2)) {
            (true, true) => Classification::A1A2Both,
            (true, false) => Classification::A1Stable,
            (false, true) => Classification::A2Stable,
            (false, false) if results.iter().any(|r| r.converged) => Classification::NoStableWave,
            _ => Classification::Unresolved,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub params: ProblemParams,
    pub reduced_regular: Option<bool>,
    pub reduced_branch: Option<usize>,
    pub case_label: CaseLabel,
    pub waves: Vec<ModeResult>,
    pub tens_steady: Option<bool>,
    pub classification: Classification,
}

impl ScanCell {
    pub fn mode(&self, kind: GuessKind) -> Option<&ModeResult> {
        self.waves.iter().find(|r| r.kind == kind)
    }

    pub fn has_stable_wave(&self) -> bool {
        self.waves.iter().any(ModeResult::is_stable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowMap {
    pub axes: ScanAxes,
    pub config: FullScanConfig,
    pub cells: Vec<ScanCell>,
    pub neutral_curves: Vec<NeutralCurve>,
}

impl FlowMap {
    pub fn cell(&self, i_mean: usize, i_f0: usize) -> &ScanCell {
        &self.cells[self.axes.index(i_mean, i_f0)]
    }

    /// Cross-checked cells where the simulation outcome disagrees with the
    /// spectra: a steady end state without a stable computed wave, or the
    /// reverse.
    pub fn tens_mismatches(&self) -> Vec<&ScanCell> {
        self.cells
            .iter()
            .filter(|c| c.tens_steady.is_some_and(|s| s != c.has_stable_wave()))
            .collect()
    }

    /// Cells of `self` at `<psi>` whose classification differs from the cell
    /// of `other` at `-<psi>` and the same forcing. Cells without a mirror
    /// partner are skipped; `other` may be `self`.
    pub fn mirror_mismatches<'a>(&'a self, other: &'a FlowMap) -> Vec<(&'a ScanCell, &'a ScanCell)> {
        let theirs = other.axes.mean.values();
        let their_f0 = other.axes.f0.values();
        let mut out = Vec::new();
        for (i, &m) in self.axes.mean.values().iter().enumerate() {
            let Some(j) = theirs.iter().position(|&x| (x + m).abs() < 1e-9) else {
                continue;
            };
            for (k, &f) in self.axes.f0.values().iter().enumerate() {
                let Some(l) = their_f0.iter().position(|&x| (x - f).abs() < 1e-9) else {
                    continue;
                };
                let (a, b) = (self.cell(i, k), other.cell(j, l));
                if a.classification != b.classification {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn curve(&self, kind: GuessKind) -> Option<&NeutralCurve> {
        self.neutral_curves.iter().find(|c| c.mode == kind)
    }
}

/// Full-model flow map. Each `<psi>` column is swept in `f0` by continuation:
/// `A2` upwards from `f0 = 0`, spike families downwards from the largest
/// forcing. A cell not reachable by continuation gets a fresh solve from the
/// family guess. Every converged wave gets a spectrum.
pub fn scan_full(axes: &ScanAxes, cfg: &FullScanConfig) -> Result<FlowMap> {
    axes.validate()?;
    if !(cfg.eps > 0.0) {
        return Err(Error::InvalidParams("the full scan needs eps > 0".into()));
    }
    if cfg.modes.contains(&GuessKind::Custom) {
        return Err(Error::InvalidParams("custom guesses cannot be scanned".into()));
    }
    cfg.newton.validate()?;
    ProblemParams::new(0.0, 0.0, cfg.v).with_eps(cfg.eps).validate()?;

    let means: Vec<(usize, f64)> = axes.mean.values().into_iter().enumerate().collect();
    let columns = parallel_map(&means, cfg.jobs, |&(i, m)| scan_column(axes, cfg, i, m));
    Ok(FlowMap {
        axes: *axes,
        config: cfg.clone(),
        cells: columns.into_iter().flatten().collect(),
        neutral_curves: Vec::new(),
    })
}

fn scan_column(axes: &ScanAxes, cfg: &FullScanConfig, i_mean: usize, mean: f64) -> Vec<ScanCell> {
    let f0s = axes.f0.values();
    let params: Vec<ProblemParams> = f0s
        .iter()
        .map(|&f| ProblemParams::new(mean, f, cfg.v).with_eps(cfg.eps))
        .collect();

    // results[i_f0][mode]
    let mut results: Vec<Vec<ModeResult>> = vec![Vec::new(); f0s.len()];
    for &kind in &cfg.modes {
        let order: Vec<usize> = if kind == GuessKind::A2 {
            (0..f0s.len()).collect()
        } else {
            (0..f0s.len()).rev().collect()
        };
        let mut prev: Option<Vec<f64>> = None;
        let mut lost = false;
        let mut fresh_failures = 0;
        for k in order {
            let r = solve_cell(&params[k], kind, cfg, prev.as_deref(), lost && fresh_failures >= cfg.max_fresh_failures);
            if r.converged && r.in_family {
                prev = r.wave.clone();
                fresh_failures = 0;
            } else {
                if prev.take().is_some() {
                    lost = true;
                }
                if !r.continued {
                    fresh_failures += 1;
                }
            }
            results[k].push(r);
        }
    }

    params
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(k, (prm, waves))| {
            let (reduced_regular, reduced_branch) = if cfg.reduced {
                match solve_reduced(&prm, cfg.n) {
                    Ok(s) => (Some(true), s.first().map(|w| w.branch.index())),
                    Err(_) => (Some(false), None),
                }
            } else {
                (None, None)
            };
            let tens_steady = cfg
                .tens
                .filter(|t| t.stride > 0 && i_mean % t.stride == 0 && k % t.stride == 0)
                .map(|t| {
                    let tc = TensConfig {
                        seed: t.config.seed.wrapping_add(axes.index(i_mean, k) as u64),
                        ..t.config
                    };
                    tens::run(&prm, &tc, &InitialCondition::Random).is_ok_and(|r| r.steady)
                });
            ScanCell {
                params: prm,
                reduced_regular,
                reduced_branch,
                case_label: classify_case(&prm),
                classification: Classification::from_results(&waves),
                waves,
                tens_steady,
            }
        })
        .collect()
}

/// One family in one cell: continuation from `prev` first, then (unless
/// `skip_fresh`) a fresh solve with a few guess rotations.
pub(crate) fn solve_cell(
    params: &ProblemParams,
    kind: GuessKind,
    cfg: &FullScanConfig,
    prev: Option<&[f64]>,
    skip_fresh: bool,
) -> ModeResult {
    let mut error = None;
    if let Some(p) = prev {
        match newton_linesearch(p, params, Model::Full, &cfg.newton, kind) {
            Ok(w) if matches_family(kind, &w.profile.values) => return analyse(kind, w, cfg.eps, true),
            Ok(_) => error = Some("continuation left the family".to_string()),
            Err(e) => error = Some(e.to_string()),
        }
    }
    if skip_fresh {
        return ModeResult::failed(kind, error);
    }
    match solve_wave_phases(params, Model::Full, kind, cfg.n, &cfg.newton, cfg.phase_trials) {
        Ok(w) => analyse(kind, w, cfg.eps, false),
        Err(e) => ModeResult::failed(kind, Some(e.to_string())),
    }
}

fn analyse(kind: GuessKind, w: TravellingWave, eps: f64, continued: bool) -> ModeResult {
    let values = w.profile.values.clone();
    let (max_re, error) = match compute_spectrum(&w.profile, eps, &StabilityOptions::default()) {
        Ok(rep) => (Some(rep.max_re), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ModeResult {
        kind,
        converged: true,
        in_family: matches_family(kind, &values),
        continued,
        iterations: w.iterations,
        spikes: count_spikes(&values, SPIKE_RANGE),
        max_re,
        error,
        wave: Some(values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartographer::Axis;

    fn result(kind: GuessKind, max_re: Option<f64>, in_family: bool) -> ModeResult {
        ModeResult {
            converged: max_re.is_some(),
            in_family,
            max_re,
            ..ModeResult::failed(kind, None)
        }
    }

    #[test]
    fn classification_rules() {
        use Classification::*;
        let a1s = result(GuessKind::A1, Some(-1.0), true);
        let a1u = result(GuessKind::A1, Some(2.0), true);
        let a2s = result(GuessKind::A2, Some(-3.0), true);
        let a2none = result(GuessKind::A2, None, false);
        assert_eq!(Classification::from_results(&[a1s.clone(), a2s.clone()]), A1A2Both);
        assert_eq!(Classification::from_results(&[a1s.clone(), a2none.clone()]), A1Stable);
        assert_eq!(Classification::from_results(&[a1u.clone(), a2s]), A2Stable);
        assert_eq!(Classification::from_results(&[a1u, a2none.clone()]), NoStableWave);
        assert_eq!(Classification::from_results(&[a2none]), Unresolved);
        // a stable wave outside its family does not count
        let off = result(GuessKind::A1, Some(-1.0), false);
        assert_eq!(Classification::from_results(&[off]), NoStableWave);
        // marginal is not stable
        let marginal = result(GuessKind::A2, Some(-1e-9), true);
        assert_eq!(Classification::from_results(&[marginal]), NoStableWave);
    }

    #[test]
    fn classification_serializes_with_map_labels() {
        let s = serde_json::to_string(&Classification::A1A2Both).unwrap();
        assert_eq!(s, "\"A1A2_both\"");
        assert_eq!(Classification::A2Stable.to_string(), "A2_stable");
    }

    #[test]
    fn small_column_scan() {
        let axes = ScanAxes::new(Axis::new(0.8, 0.8, 0.1), Axis::new(0.0, 0.2, 0.1));
        let cfg = FullScanConfig {
            modes: vec![GuessKind::A2],
            tens: Some(TensCheck {
                stride: 2,
                config: TensConfig {
                    n_modes: 128,
                    t_final: 3.0,
                    ..TensConfig::default()
                },
            }),
            ..FullScanConfig::default()
        };
        let map = scan_full(&axes, &cfg).unwrap();
        assert_eq!(map.cells.len(), 3);
        for (k, c) in map.cells.iter().enumerate() {
            let a2 = c.mode(GuessKind::A2).unwrap();
            assert!(a2.converged && a2.in_family, "f0 = {}", c.params.f0);
            assert_eq!(c.classification, Classification::A2Stable);
            assert_eq!(c.reduced_regular, Some(true));
            // continuation after the first cell
            assert_eq!(a2.continued, k > 0);
        }
        assert_eq!(map.cells[0].tens_steady, Some(true));
        assert_eq!(map.cells[1].tens_steady, None);
        assert!(map.tens_mismatches().is_empty());
    }

    #[test]
    fn invalid_scans_are_rejected() {
        let axes = ScanAxes::default();
        let cfg = FullScanConfig {
            eps: 0.0,
            ..FullScanConfig::default()
        };
        assert!(scan_full(&axes, &cfg).is_err());
        let cfg = FullScanConfig {
            modes: vec![GuessKind::Custom],
            ..FullScanConfig::default()
        };
        assert!(scan_full(&axes, &cfg).is_err());
    }
}
