//! Command-line flags. Every flag is optional and overrides the value from
//! `--config` (or the built-in default).

use std::path::PathBuf;

use chwave::cartographer::Axis;
use chwave::GuessKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{
    Command, Format, FullRun, Method, ReducedRun, RunConfig, ScanMode, ScanRun, TensRun,
};

#[derive(Debug, Parser)]
#[command(name = "chwave", version, about = "Travelling waves of the forced Cahn-Hilliard equation")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the effective configuration as TOML to stdout and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Periodic solution of the reduced (eps = 0) model.
    SolveReduced(ReducedArgs),
    /// Travelling wave of the full model by Newton's method.
    SolveFull(FullArgs),
    /// Time evolution from a random initial state.
    Tens(TensArgs),
    /// Parameter-space scan over (<psi>, f0).
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<f64>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReducedArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Debug, Args)]
pub struct FullArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// a2, a1, a3 or nspike:<n>
    #[arg(long)]
    pub guess: Option<GuessKind>,
    /// Also compute the linear spectrum of the wave.
    #[arg(long)]
    pub stability: bool,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TensArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tfinal: Option<f64>,
    #[arg(long)]
    pub nmodes: Option<usize>,
    /// Record the field every this many time units.
    #[arg(long)]
    pub snap: Option<f64>,
    /// Keep integrating after a steady state is declared.
    #[arg(long)]
    pub full_time: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ScanMode>,
    #[arg(long, allow_hyphen_values = true)]
    pub mean_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mean_stop: Option<f64>,
    #[arg(long)]
    pub mean_step: Option<f64>,
    #[arg(long)]
    pub f0_start: Option<f64>,
    #[arg(long)]
    pub f0_stop: Option<f64>,
    #[arg(long)]
    pub f0_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Reduced mode: spectra of the reduced waves.
    #[arg(long)]
    pub stability: bool,
    /// Full mode: comma-separated families, e.g. a1,a2,a3.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<GuessKind>>,
    /// Full mode: simulation cross-check stride, 0 to disable.
    #[arg(long)]
    pub tens_stride: Option<usize>,
    #[arg(long)]
    pub neutral_tol: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ProblemArgs {
    fn apply(&self, p: &mut chwave::ProblemParams) {
        set(&mut p.mean_psi, self.mean);
        set(&mut p.f0, self.f0);
        set(&mut p.v, self.v);
    }
}

fn apply_axis(axis: &mut Axis, start: Option<f64>, stop: Option<f64>, step: Option<f64>) {
    set(&mut axis.start, start);
    set(&mut axis.stop, stop);
    set(&mut axis.step, step);
}

impl Sub {
    pub fn name(&self) -> &'static str {
        match self {
            Sub::SolveReduced(_) => "solve-reduced",
            Sub::SolveFull(_) => "solve-full",
            Sub::Tens(_) => "tens",
            Sub::Scan(_) => "scan",
        }
    }

    fn default_command(&self) -> Command {
        match self {
            Sub::SolveReduced(_) => Command::SolveReduced(ReducedRun::default()),
            Sub::SolveFull(_) => Command::SolveFull(FullRun::default()),
            Sub::Tens(_) => Command::Tens(TensRun::default()),
            Sub::Scan(_) => Command::Scan(ScanRun::default()),
        }
    }

    fn apply(&self, command: &mut Command) {
        match (self, command) {
            (Sub::SolveReduced(a), Command::SolveReduced(r)) => {
                a.problem.apply(&mut r.params);
                set(&mut r.n, a.n);
                set(&mut r.method, a.method);
            }
            (Sub::SolveFull(a), Command::SolveFull(r)) => {
                a.problem.apply(&mut r.params);
                set(&mut r.params.eps, a.eps);
                set(&mut r.n, a.n);
                set(&mut r.guess, a.guess);
                r.stability |= a.stability;
                set(&mut r.newton.max_outer, a.max_iter);
                set(&mut r.newton.tol_residual, a.tol);
            }
            (Sub::Tens(a), Command::Tens(r)) => {
                a.problem.apply(&mut r.params);
                set(&mut r.params.eps, a.eps);
                set(&mut r.dt, a.dt);
                set(&mut r.t_final, a.tfinal);
                set(&mut r.n_modes, a.nmodes);
                if a.snap.is_some() {
                    r.snapshot_every = a.snap;
                }
                if a.full_time {
                    r.stop_when_steady = false;
                }
            }
            (Sub::Scan(a), Command::Scan(r)) => {
                set(&mut r.mode, a.mode);
                apply_axis(&mut r.axes.mean, a.mean_start, a.mean_stop, a.mean_step);
                apply_axis(&mut r.axes.f0, a.f0_start, a.f0_stop, a.f0_step);
                set(&mut r.v, a.v);
                set(&mut r.eps, a.eps);
                set(&mut r.n, a.n);
                set(&mut r.jobs, a.jobs);
                r.stability |= a.stability;
                set(&mut r.modes, a.modes.clone());
                set(&mut r.tens_stride, a.tens_stride);
                set(&mut r.neutral_tol, a.neutral_tol);
            }
            _ => unreachable!("command kind checked by the caller"),
        }
    }
}

impl Cli {
    /// Effective configuration: the file (if any), then the flags.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = RunConfig::read(path)?;
                if cfg.command.name() != self.command.name() {
                    anyhow::bail!(
                        "{} holds a '{}' configuration, not '{}'",
                        path.display(),
                        cfg.command.name(),
                        self.command.name()
                    );
                }
                cfg
            }
            None => RunConfig::new(self.command.default_command()),
        };
        set(&mut cfg.output_dir, self.out.clone());
        set(&mut cfg.format, self.format);
        set(&mut cfg.seed, self.seed);
        self.command.apply(&mut cfg.command);
        Ok(cfg)
    }
}
