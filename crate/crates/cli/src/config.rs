//! Run configuration. A run is fully described by a [`RunConfig`], which is
//! read from a TOML file, overridden by flags and embedded in every output.

use std::path::{Path, PathBuf};

use anyhow::Context;
use chwave::cartographer::{FullScanConfig, ReducedScanConfig, ScanAxes, TensCheck};
use chwave::{GuessKind, NewtonConfig, ProblemParams, TensConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Shoot,
    Newton,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    #[default]
    Reduced,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedRun {
    pub params: ProblemParams,
    pub n: usize,
    pub method: Method,
    /// Used by `method = newton`.
    pub newton: NewtonConfig,
}

impl Default for ReducedRun {
    fn default() -> Self {
        Self {
            params: ProblemParams::new(0.7, 0.12, 1.0),
            n: 512,
            method: Method::Shoot,
            newton: NewtonConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullRun {
    pub params: ProblemParams,
    pub n: usize,
    pub guess: GuessKind,
    pub stability: bool,
    pub newton: NewtonConfig,
}

impl Default for FullRun {
    fn default() -> Self {
        Self {
            params: ProblemParams::new(0.65, 0.1, 1.0).with_eps(5e-4),
            n: 256,
            guess: GuessKind::A2,
            stability: false,
            newton: NewtonConfig::default(),
        }
    }
}

/// Simulation settings; the seed is [`RunConfig::seed`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensRun {
    pub params: ProblemParams,
    pub n_modes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub init_amplitude: f64,
    pub steady_tol: f64,
    pub steady_window: f64,
    pub stop_when_steady: bool,
    pub snapshot_every: Option<f64>,
}

impl Default for TensRun {
    fn default() -> Self {
        let t = TensConfig::default();
        Self {
            params: ProblemParams::new(0.5, 1.5, 1.0).with_eps(5e-4),
            n_modes: t.n_modes,
            dt: t.dt,
            t_final: t.t_final,
            init_amplitude: t.init_amplitude,
            steady_tol: t.steady_tol,
            steady_window: t.steady_window,
            stop_when_steady: t.stop_when_steady,
            snapshot_every: t.snapshot_every,
        }
    }
}

impl TensRun {
    pub fn tens_config(&self, seed: u64) -> TensConfig {
        TensConfig {
            n_modes: self.n_modes,
            dt: self.dt,
            t_final: self.t_final,
            seed,
            init_amplitude: self.init_amplitude,
            steady_tol: self.steady_tol,
            steady_window: self.steady_window,
            stop_when_steady: self.stop_when_steady,
            snapshot_every: self.snapshot_every,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRun {
    pub mode: ScanMode,
    pub axes: ScanAxes,
    pub v: f64,
    /// Full mode only.
    pub eps: f64,
    pub n: usize,
    pub jobs: usize,
    /// Reduced mode: also classify each reduced wave spectrally.
    pub stability: bool,
    /// Full mode: families solved in every cell.
    pub modes: Vec<GuessKind>,
    /// Full mode: simulation cross-check on every `tens_stride`-th mean and
    /// forcing; 0 switches it off.
    pub tens_stride: usize,
    pub tens_t_final: f64,
    /// Full mode: bisection tolerance of the neutral curves in `f0`.
    pub neutral_tol: f64,
}

impl Default for ScanRun {
    fn default() -> Self {
        let full = FullScanConfig::default();
        let tens = TensCheck::default();
        Self {
            mode: ScanMode::Reduced,
            axes: ScanAxes::default_grid(),
            v: 1.0,
            eps: full.eps,
            n: full.n,
            jobs: 1,
            stability: false,
            modes: full.modes,
            tens_stride: tens.stride,
            tens_t_final: tens.config.t_final,
            neutral_tol: 1e-3,
        }
    }
}

impl ScanRun {
    pub fn reduced_config(&self) -> ReducedScanConfig {
        ReducedScanConfig {
            v: self.v,
            n: self.n,
            stability: self.stability,
            jobs: self.jobs,
        }
    }

    pub fn full_config(&self, seed: u64) -> FullScanConfig {
        let tens = (self.tens_stride > 0).then(|| TensCheck {
            stride: self.tens_stride,
            config: TensConfig {
                n_modes: self.n,
                t_final: self.tens_t_final,
                seed,
                ..TensConfig::default()
            },
        });
        FullScanConfig {
            v: self.v,
            eps: self.eps,
            n: self.n,
            modes: self.modes.clone(),
            tens,
            jobs: self.jobs,
            ..FullScanConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Command {
    SolveReduced(ReducedRun),
    SolveFull(FullRun),
    Tens(TensRun),
    Scan(ScanRun),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveReduced(_) => "solve-reduced",
            Command::SolveFull(_) => "solve-full",
            Command::Tens(_) => "tens",
            Command::Scan(_) => "scan",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub command: Command,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            format: Format::Both,
            seed: 0,
            command,
        }
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_round_trips_through_toml() {
        let commands = [
            Command::SolveReduced(ReducedRun::default()),
            Command::SolveFull(FullRun {
                guess: GuessKind::NSpike(3),
                ..FullRun::default()
            }),
            Command::Tens(TensRun {
                snapshot_every: Some(0.5),
                ..TensRun::default()
            }),
            Command::Scan(ScanRun::default()),
        ];
        for c in commands {
            let cfg = RunConfig::new(c);
            let text = cfg.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg, "{text}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = RunConfig::new(Command::Tens(TensRun::default())).to_toml().unwrap();
        text = text.replace("seed = 0", "seed = 0\nsede = 1");
        assert!(RunConfig::from_toml(&text).is_err());
    }
}
