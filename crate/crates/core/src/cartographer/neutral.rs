use serde::{Deserialize, Serialize};

use super::flow::{solve_cell, FlowMap, FullScanConfig, ModeResult};
use crate::error::{Error, Result};
use crate::newton::{solve_wave_phases, GuessKind, Model, PHASE_TRIALS};
use crate::params::ProblemParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeutralPoint {
    pub mean_psi: f64,
    /// Midpoint of the final bracket.
    pub f0: f64,
    /// Last forcing with a stable wave of the family.
    pub f0_stable: f64,
    pub f0_unstable: f64,
    /// Largest growth rate of the wave at `f0_stable`.
    pub max_re: f64,
    /// The family is stable on the larger-`f0` side of the point.
    pub stable_above: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeutralCurve {
    pub name: String,
    pub mode: GuessKind,
    pub tol: f64,
    pub points: Vec<NeutralPoint>,
}

impl NeutralCurve {
    /// `NC1` for `A1`, `NC2` for `A3`, `NC3` for `A2`.
    pub fn name_for(mode: GuessKind) -> String {
        match mode {
            GuessKind::A1 => "NC1".to_string(),
            GuessKind::A3 => "NC2".to_string(),
            GuessKind::A2 => "NC3".to_string(),
            other => format!("NC_{other:?}"),
        }
    }

    pub fn points_at(&self, mean_psi: f64) -> impl Iterator<Item = &NeutralPoint> {
        self.points.iter().filter(move |p| (p.mean_psi - mean_psi).abs() < 1e-9)
    }

    /// Onset of the topmost stable interval: the last point at this mean,
    /// provided the family is stable above it.
    pub fn onset(&self, mean_psi: f64) -> Option<f64> {
        let top = self.points_at(mean_psi).max_by(|a, b| a.f0.total_cmp(&b.f0))?;
        top.stable_above.then_some(top.f0)
    }
}

/// Stability boundary of `mode` in `f0`, one bisection per sign change of the
/// stability of `mode` between neighbouring cells of a column. The predicate
/// is "converged, inside its family and stable", so a boundary where the wave
/// ceases to exist counts as well. Columns without a change are skipped.
pub fn trace_neutral_curve(map: &FlowMap, mode: GuessKind, tol: f64) -> Result<NeutralCurve> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams("bisection tolerance must be positive".into()));
    }
    if !map.config.modes.contains(&mode) {
        return Err(Error::InvalidParams(format!("{mode:?} was not scanned")));
    }
    let nf = map.axes.f0.len();
    let mut points = Vec::new();
    for (i, &mean) in map.axes.mean.values().iter().enumerate() {
        for k in 0..nf.saturating_sub(1) {
            let (lo, hi) = (map.cell(i, k), map.cell(i, k + 1));
            let (Some(a), Some(b)) = (lo.mode(mode), hi.mode(mode)) else {
                continue;
            };
            if a.is_stable() == b.is_stable() {
                continue;
            }
            let (stable, other) = if a.is_stable() { (lo, hi) } else { (hi, lo) };
            let seed = stable.mode(mode).expect("mode present");
            if let Some(p) = bisect(&map.config, mode, &stable.params, seed, other.params.f0, tol) {
                points.push(NeutralPoint { mean_psi: mean, ..p });
            }
        }
    }
    Ok(NeutralCurve {
        name: NeutralCurve::name_for(mode),
        mode,
        tol,
        points,
    })
}

fn bisect(
    cfg: &FullScanConfig,
    mode: GuessKind,
    stable_params: &ProblemParams,
    seed: &ModeResult,
    f0_other: f64,
    tol: f64,
) -> Option<NeutralPoint> {
    // stored waves are dropped when a map is read back from disk
    let mut wave = match &seed.wave {
        Some(w) => w.clone(),
        None => solve_wave_phases(stable_params, Model::Full, mode, cfg.n, &cfg.newton, PHASE_TRIALS)
            .ok()?
            .profile
            .values,
    };
    let mut f_stable = stable_params.f0;
    let mut f_other = f0_other;
    let mut max_re = seed.max_re?;
    while (f_stable - f_other).abs() > tol {
        let mid = 0.5 * (f_stable + f_other);
        let r = solve_cell(&stable_params.with_f0(mid), mode, cfg, Some(&wave), true);
        if r.is_stable() {
            f_stable = mid;
            max_re = r.max_re?;
            wave = r.wave?;
        } else {
            f_other = mid;
        }
    }
    Some(NeutralPoint {
        mean_psi: stable_params.mean_psi,
        f0: 0.5 * (f_stable + f_other),
        f0_stable: f_stable,
        f0_unstable: f_other,
        max_re,
        stable_above: f_stable > f_other,
    })
}

impl FlowMap {
    /// Traces the neutral curve of every scanned family and stores them.
    pub fn trace_neutral_curves(&mut self, tol: f64) -> Result<()> {
        let mut curves = Vec::new();
        for &mode in &self.config.modes {
            curves.push(trace_neutral_curve(self, mode, tol)?);
        }
        self.neutral_curves = curves;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartographer::{scan_full, Axis, ScanAxes};

    #[test]
    fn names_follow_the_family() {
        assert_eq!(NeutralCurve::name_for(GuessKind::A1), "NC1");
        assert_eq!(NeutralCurve::name_for(GuessKind::A3), "NC2");
        assert_eq!(NeutralCurve::name_for(GuessKind::A2), "NC3");
    }

    #[test]
    fn onset_is_the_top_point_when_stable_above() {
        let pt = |f0, stable_above| NeutralPoint {
            mean_psi: 0.5,
            f0,
            f0_stable: f0,
            f0_unstable: f0,
            max_re: 0.0,
            stable_above,
        };
        let mut c = NeutralCurve {
            name: "NC1".into(),
            mode: GuessKind::A1,
            tol: 1e-3,
            points: vec![pt(0.4, true), pt(0.7, false), pt(1.2, true)],
        };
        assert_eq!(c.onset(0.5), Some(1.2));
        assert_eq!(c.onset(0.6), None);
        c.points.push(pt(1.5, false));
        assert_eq!(c.onset(0.5), None);
    }

    #[test]
    fn a2_loses_stability_between_grid_cells() {
        // at <psi> = 0.65 the small-forcing wave is stable at f0 = 0.1 and
        // unstable at f0 = 0.3
        let axes = ScanAxes::new(Axis::new(0.65, 0.65, 0.1), Axis::new(0.1, 0.3, 0.2));
        let cfg = FullScanConfig {
            modes: vec![GuessKind::A2],
            tens: None,
            reduced: false,
            ..FullScanConfig::default()
        };
        let map = scan_full(&axes, &cfg).unwrap();
        assert!(map.cell(0, 0).mode(GuessKind::A2).unwrap().is_stable());
        assert!(!map.cell(0, 1).mode(GuessKind::A2).unwrap().is_stable());
        let nc = trace_neutral_curve(&map, GuessKind::A2, 1e-3).unwrap();
        assert_eq!(nc.points.len(), 1);
        let p = nc.points[0];
        assert!(!p.stable_above);
        assert!(p.f0 > 0.1 && p.f0 < 0.3);
        assert!((p.f0_stable - p.f0_unstable).abs() <= 1e-3);
        assert!(p.max_re < 0.0);
        assert!(trace_neutral_curve(&map, GuessKind::A1, 1e-3).is_err());
    }
}
