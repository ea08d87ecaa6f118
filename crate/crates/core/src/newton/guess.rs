use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::periodic_samples;
use crate::params::ProblemParams;
use crate::reduced::first_order_correction;

/// Which initial guess seeded a Newton solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuessKind {
    /// Oscillation about the mean.
    A2,
    /// Single spike, `s = +1`.
    A1,
    /// Single spike, `s = -1`.
    A3,
    /// `n` replicated spikes with `s = +1`.
    NSpike(usize),
    Custom,
}

impl GuessKind {
    /// Spike count of the guess family, if any.
    pub fn spikes(self) -> Option<usize> {
        match self {
            GuessKind::A1 | GuessKind::A3 => Some(1),
            GuessKind::NSpike(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for GuessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessKind::A2 => write!(f, "a2"),
            GuessKind::A1 => write!(f, "a1"),
            GuessKind::A3 => write!(f, "a3"),
            GuessKind::NSpike(n) => write!(f, "nspike:{n}"),
            GuessKind::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for GuessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a2" => Ok(GuessKind::A2),
            "a1" => Ok(GuessKind::A1),
            "a3" => Ok(GuessKind::A3),
            "custom" => Ok(GuessKind::Custom),
            other => {
                let n = other
                    .strip_prefix("nspike:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown guess kind '{s}'")))?;
                Ok(GuessKind::NSpike(n))
            }
        }
    }
}

/// An initial guess. `degenerate` flags spike constructions whose interfaces
/// are closer than four interface widths; the values are still usable.
#[derive(Clone, Debug, PartialEq)]
pub struct Guess {
    pub values: Vec<f64>,
    pub kind: GuessKind,
    pub degenerate: bool,
}

fn shift_to_mean(values: &mut [f64], mean: f64) {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|x| *x += mean - m);
}

/// Oscillation about the mean, `<psi> + f0 phi_1(eta)` from the small-forcing
/// expansion, clipped to `[-1.5, 1.5]` and re-centred on `<psi>`. On the
/// spinodal point the expansion is undefined and a small sinusoid is used.
pub fn guess_a2(params: &ProblemParams, n: usize) -> Guess {
    let eta = periodic_samples(params.l_period, n);
    let m = params.mean_psi;
    let mut values: Vec<f64> = match first_order_correction(params) {
        Ok(phi) => eta.iter().map(|&x| (m + params.f0 * phi(x)).clamp(-1.5, 1.5)).collect(),
        Err(_) => eta
            .iter()
            .map(|&x| m + 0.1 * params.f0 * (params.k_wave * x).cos())
            .collect(),
    };
    shift_to_mean(&mut values, m);
    Guess {
        values,
        kind: GuessKind::A2,
        degenerate: false,
    }
}

/// Patchwork spike guess built from `tanh` interfaces of width `sqrt(2 eps)`.
///
/// One spike is `s tanh((eta - c1)/w) tanh((eta - c2)/w)` with `c1 = L/4` and
/// `c2 = c1 + L (1 - s <psi>)/2`: the value `-s` between the interfaces and
/// `+s` outside, which gives mean `<psi>` for sharp interfaces. For
/// `n_spikes > 1` the pattern is compressed by `n` and replicated on each
/// cell `[m L/n, (m+1) L/n)`, keeping the interface width. The result is
/// shifted by a constant so its sample mean is exactly `<psi>`.
pub fn guess_spike(params: &ProblemParams, n: usize, n_spikes: usize, sign: f64) -> Result<Guess> {
    if params.eps <= 0.0 {
        return Err(Error::InvalidParams("spike guesses need eps > 0".into()));
    }
    if n_spikes == 0 {
        return Err(Error::InvalidParams("spike count must be at least 1".into()));
    }
    let s = if sign >= 0.0 { 1.0 } else { -1.0 };
    let l = params.l_period;
    let w = (2.0 * params.eps).sqrt();
    let c1 = l / 4.0;
    let inner = (l * (1.0 - s * params.mean_psi) / 2.0).clamp(0.0, l);
    let cells = n_spikes as f64;
    let inner_cell = inner / cells;
    let outer_cell = (l - inner) / cells;
    let degenerate = inner_cell.min(outer_cell) < 4.0 * w;

    // one factor per replica: approximately -1 on its arc, +1 elsewhere
    let factor = |eta: f64, start: f64| -> f64 {
        let end = start + inner_cell;
        // wrap eta into the window centred on the middle of the outer arc
        let window_start = end + 0.5 * (l - inner_cell) - l;
        let x = window_start + (eta - window_start).rem_euclid(l);
        ((x - start) / w).tanh() * ((x - end) / w).tanh()
    };
    let starts: Vec<f64> = (0..n_spikes)
        .map(|m| m as f64 * l / cells + c1 / cells)
        .collect();
    let mut values: Vec<f64> = periodic_samples(l, n)
        .into_iter()
        .map(|eta| s * starts.iter().map(|&st| factor(eta, st)).product::<f64>())
        .collect();
    shift_to_mean(&mut values, params.mean_psi);
    let kind = match (n_spikes, s > 0.0) {
        (1, true) => GuessKind::A1,
        (1, false) => GuessKind::A3,
        (k, _) => GuessKind::NSpike(k),
    };
    Ok(Guess {
        values,
        kind,
        degenerate,
    })
}

/// Guess for a named kind. `Custom` has no generator.
///
/// For `<psi> < 0` (and even `n`) the guess is the mirror image
/// `-g(eta + L/2)` of the guess at `-<psi>`, so solutions found from a family
/// map onto the same family under the symmetry.
pub fn guess_for(kind: GuessKind, params: &ProblemParams, n: usize) -> Result<Guess> {
    if params.mean_psi < 0.0 && n % 2 == 0 {
        let g = guess_for(kind, &params.mirrored(), n)?;
        let values = (0..n).map(|i| -g.values[(i + n / 2) % n]).collect();
        return Ok(Guess { values, ..g });
    }
    match kind {
        GuessKind::A2 => Ok(guess_a2(params, n)),
        GuessKind::A1 => guess_spike(params, n, 1, 1.0),
        GuessKind::A3 => guess_spike(params, n, 1, -1.0),
        GuessKind::NSpike(k) => guess_spike(params, n, k, 1.0),
        GuessKind::Custom => Err(Error::InvalidParams("custom guesses must be supplied".into())),
    }
}

/// Number of spikes of a profile: rising crossings of the level halfway
/// between its extremes, counted periodically. Profiles whose range is below
/// `min_range` count as zero.
pub fn count_spikes(values: &[f64], min_range: f64) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min < min_range {
        return 0;
    }
    let mid = 0.5 * (max + min);
    let n = values.len();
    (0..n)
        .filter(|&i| values[i] < mid && values[(i + 1) % n] >= mid)
        .count()
}

/// Peak-to-peak range a crossing must span to count as a spike when a
/// converged wave is assigned to a family.
pub const SPIKE_RANGE: f64 = 1.0;

/// Whether a converged profile belongs to the family of `kind`: spike
/// families need exactly their number of spikes spanning [`SPIKE_RANGE`],
/// `A2` anything but a single spike. `Custom` matches everything.
pub fn matches_family(kind: GuessKind, values: &[f64]) -> bool {
    let spikes = count_spikes(values, SPIKE_RANGE);
    match kind {
        GuessKind::A2 => spikes != 1,
        GuessKind::Custom => true,
        k => k.spikes() == Some(spikes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_unforced_is_constant() {
        let g = guess_a2(&ProblemParams::new(0.3, 0.0, 1.0), 32);
        assert!(g.values.iter().all(|&x| (x - 0.3).abs() < 1e-15));
    }

    #[test]
    fn a2_mean_is_exact() {
        for f0 in [0.1, 1.0, 3.0] {
            let g = guess_a2(&ProblemParams::new(0.7, f0, 1.0), 128);
            let m = g.values.iter().sum::<f64>() / 128.0;
            assert!((m - 0.7).abs() < 1e-13, "f0 = {f0}");
        }
    }

    #[test]
    fn a2_on_spinodal_falls_back() {
        let m = 1.0 / 3f64.sqrt();
        let g = guess_a2(&ProblemParams::new(m, 0.5, 1.0), 32);
        assert!(g.values.iter().all(|x| x.is_finite()));
        assert!(g.values.iter().any(|&x| (x - m).abs() > 1e-3));
    }

    #[test]
    fn spike_raw_mean_is_close_to_target() {
        // before the constant shift the construction is within O(sqrt eps)
        let prm = ProblemParams::new(0.0, 0.1, 1.0).with_eps(1e-5);
        let g = guess_spike(&prm, 2048, 1, 1.0).unwrap();
        let mean = g.values.iter().sum::<f64>() / 2048.0;
        assert!(mean.abs() < 1e-12);
        let max = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // a shift of O(sqrt eps) at most was applied
        assert!((max - 1.0).abs() < 10.0 * (2e-5f64).sqrt());
    }

    #[test]
    fn spike_shapes() {
        let prm = ProblemParams::new(0.3, 0.1, 1.0).with_eps(1e-4);
        let a1 = guess_spike(&prm, 512, 1, 1.0).unwrap();
        assert_eq!(a1.kind, GuessKind::A1);
        assert_eq!(count_spikes(&a1.values, 0.5), 1);
        // s = +1 puts the -1 phase at L/4 + a bit
        assert!(a1.values[512 / 4 + 20] < -0.5);
        assert!(a1.values[2] > 0.5);
        let a3 = guess_spike(&prm, 512, 1, -1.0).unwrap();
        assert_eq!(a3.kind, GuessKind::A3);
        assert!(a3.values[512 / 4 + 20] > 0.5);
        for k in 2..=6 {
            let g = guess_spike(&prm, 1024, k, 1.0).unwrap();
            assert_eq!(count_spikes(&g.values, 0.5), k, "k = {k}");
            assert!(!g.degenerate);
        }
    }

    #[test]
    fn crowded_spikes_are_flagged() {
        let prm = ProblemParams::new(0.1, 0.1, 1.0).with_eps(5e-4);
        let g = guess_spike(&prm, 512, 7, 1.0).unwrap();
        assert!(g.degenerate);
        assert!(guess_spike(&prm.with_eps(0.0), 64, 1, 1.0).is_err());
    }

    #[test]
    fn negative_mean_guesses_are_mirror_images() {
        let prm = ProblemParams::new(0.4, 0.8, 1.0).with_eps(5e-4);
        for kind in [GuessKind::A1, GuessKind::A2, GuessKind::A3, GuessKind::NSpike(3)] {
            let g = guess_for(kind, &prm, 64).unwrap();
            let h = guess_for(kind, &prm.mirrored(), 64).unwrap();
            assert_eq!(h.kind, kind);
            for i in 0..64 {
                assert_eq!(h.values[i], -g.values[(i + 32) % 64]);
            }
        }
    }

    #[test]
    fn family_membership() {
        let spike: Vec<f64> = (0..64).map(|i| if (16..28).contains(&i) { -1.0 } else { 1.0 }).collect();
        assert!(matches_family(GuessKind::A1, &spike));
        assert!(matches_family(GuessKind::A3, &spike));
        assert!(!matches_family(GuessKind::A2, &spike));
        assert!(!matches_family(GuessKind::NSpike(2), &spike));
        let small: Vec<f64> = (0..64).map(|i| 0.6 + 0.1 * (i as f64 / 10.0).sin()).collect();
        assert!(matches_family(GuessKind::A2, &small));
        assert!(!matches_family(GuessKind::A1, &small));
        assert!(matches_family(GuessKind::Custom, &small));
    }

    #[test]
    fn guess_kind_round_trips_through_text() {
        for k in [GuessKind::A1, GuessKind::A2, GuessKind::A3, GuessKind::NSpike(4), GuessKind::Custom] {
            assert_eq!(k.to_string().parse::<GuessKind>().unwrap(), k);
        }
        assert!("nspike:0".parse::<GuessKind>().is_err());
        assert!("b7".parse::<GuessKind>().is_err());
    }
}
