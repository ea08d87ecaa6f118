//! Subcommand drivers. Each writes its artifacts into the output directory
//! and reports an [`Outcome`] that maps to the exit code.

use std::fs;

use anyhow::Context;
use chwave::cartographer::{
    flow_map_table, neutral_curve_table, reduced_map_table, scan_full, scan_reduced,
};
use chwave::io::{fmt_f64, profile_table, spectrum_table, to_json, Header, Table};
use chwave::newton::{count_spikes, solve_wave, SPIKE_RANGE};
use chwave::reduced::solve_reduced;
use chwave::{
    classify_case, compute_spectrum, tens, Error, GuessKind, InitialCondition, Model, Profile, StabilityOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, FullRun, Method, ReducedRun, RunConfig, ScanMode, ScanRun, TensRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Reduced model: only singular trajectories.
    Singular,
    /// Simulation ended without reaching a steady state.
    NotSteady,
    NoConvergence,
    BlowUp,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Singular | Outcome::NotSteady => 2,
            Outcome::NoConvergence | Outcome::BlowUp => 3,
        }
    }
}

/// Failure that is not a solver outcome.
#[derive(Debug)]
pub enum Failure {
    /// Rejected input; exit code 64.
    Usage(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::DegenerateMean(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Other(other.into()),
        }
    }
}

pub type CmdResult = std::result::Result<Outcome, Failure>;

struct Writer<'a> {
    cfg: &'a RunConfig,
    header: Header,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> anyhow::Result<Self> {
        fs::create_dir_all(&cfg.output_dir)
            .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
        let header = Header::new()
            .with("program", format!("chwave {}", env!("CARGO_PKG_VERSION")))
            .with("command", cfg.command.name())
            .with_json("config", cfg)?;
        Ok(Self { cfg, header })
    }

    fn header(&self) -> Header {
        self.header.clone()
    }

    fn table(&self, name: &str, table: &Table) -> anyhow::Result<()> {
        if !self.cfg.format.csv() {
            return Ok(());
        }
        let path = self.cfg.output_dir.join(name);
        fs::write(&path, table.render()).with_context(|| format!("writing {}", path.display()))
    }

    /// `run.json`: configuration, status and results of the run.
    fn document(&self, status: &str, body: Value) -> anyhow::Result<()> {
        if !self.cfg.format.json() {
            return Ok(());
        }
        let doc = json!({
            "program": format!("chwave {}", env!("CARGO_PKG_VERSION")),
            "config": serde_json::to_value(self.cfg)?,
            "status": status,
            "result": body,
        });
        let path = self.cfg.output_dir.join("run.json");
        fs::write(&path, to_json(&doc)? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

fn profile_json(p: &Profile) -> Value {
    json!({ "eta": p.grid(), "psi": p.values })
}

fn value<T: Serialize>(x: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(x)?)
}

pub fn execute(cfg: &RunConfig) -> CmdResult {
    match &cfg.command {
        Command::SolveReduced(r) => solve_reduced_cmd(cfg, r),
        Command::SolveFull(r) => solve_full_cmd(cfg, r),
        Command::Tens(r) => tens_cmd(cfg, r),
        Command::Scan(r) => scan_cmd(cfg, r),
    }
}

fn solve_reduced_cmd(cfg: &RunConfig, run: &ReducedRun) -> CmdResult {
    run.params.validate()?;
    let out = Writer::new(cfg)?;
    let case = classify_case(&run.params);
    match run.method {
        Method::Shoot => match solve_reduced(&run.params, run.n) {
            Ok(sols) => {
                let main = case
                    .case
                    .branch()
                    .and_then(|b| sols.iter().find(|s| s.branch.index() == b))
                    .unwrap_or(&sols[0]);
                let header = out
                    .header()
                    .with("branch", main.branch.index().to_string())
                    .with("shoot_root", fmt_f64(main.shoot_root));
                out.table("profile.csv", &profile_table(&main.profile, header)?)?;
                let summary: Vec<Value> = sols
                    .iter()
                    .map(|s| {
                        json!({
                            "branch": s.branch.index(),
                            "shoot_root": s.shoot_root,
                            "defect": s.defect,
                            "near_singular": s.near_singular,
                            "min_abs_s": s.min_abs_s,
                        })
                    })
                    .collect();
                out.document(
                    "regular",
                    json!({
                        "case": value(&case)?,
                        "branch": main.branch.index(),
                        "solutions": summary,
                        "profile": profile_json(&main.profile),
                    }),
                )?;
                println!("regular solution on branch {} (N = {})", main.branch.index(), run.n);
                Ok(Outcome::Success)
            }
            Err(Error::SingularOnly { branch }) => {
                out.document("singular", json!({ "case": value(&case)?, "branch": branch }))?;
                eprintln!("only singular trajectories (branch {branch})");
                Ok(Outcome::Singular)
            }
            Err(e) => Err(e.into()),
        },
        Method::Newton => match solve_wave(&run.params, Model::Reduced, GuessKind::A2, run.n, &run.newton) {
            Ok(w) => {
                let header = out
                    .header()
                    .with("iterations", w.iterations.to_string())
                    .with("final_residual", fmt_f64(w.final_residual));
                out.table("profile.csv", &profile_table(&w.profile, header)?)?;
                out.document(
                    "converged",
                    json!({
                        "case": value(&case)?,
                        "iterations": w.iterations,
                        "final_residual": w.final_residual,
                        "history": w.history,
                        "profile": profile_json(&w.profile),
                    }),
                )?;
                println!("converged in {} iterations, |F| = {:e}", w.iterations, w.final_residual);
                Ok(Outcome::Success)
            }
            Err(e) => newton_failure(&out, e),
        },
    }
}

fn newton_failure(out: &Writer, e: Error) -> CmdResult {
    match e {
        Error::NoConvergence { .. } | Error::LineSearchStalled { .. } | Error::JacobianSingular { .. } => {
            out.document("no_convergence", json!({ "error": e.to_string() }))?;
            eprintln!("no convergence: {e}");
            Ok(Outcome::NoConvergence)
        }
        other => Err(other.into()),
    }
}

fn solve_full_cmd(cfg: &RunConfig, run: &FullRun) -> CmdResult {
    run.params.validate()?;
    if !(run.params.eps > 0.0) {
        return Err(Failure::Usage("solve-full needs --eps > 0".into()));
    }
    let out = Writer::new(cfg)?;
    let w = match solve_wave(&run.params, Model::Full, run.guess, run.n, &run.newton) {
        Ok(w) => w,
        Err(e) => return newton_failure(&out, e),
    };
    let spikes = count_spikes(&w.profile.values, SPIKE_RANGE);
    let header = out
        .header()
        .with("iterations", w.iterations.to_string())
        .with("final_residual", fmt_f64(w.final_residual))
        .with("spikes", spikes.to_string());
    out.table("wave.csv", &profile_table(&w.profile, header)?)?;
    let mut body = json!({
        "iterations": w.iterations,
        "final_residual": w.final_residual,
        "guess_shift": w.guess_shift,
        "spikes": spikes,
        "history": w.history,
        "profile": profile_json(&w.profile),
    });
    let mut line = format!(
        "converged in {} iterations, |F| = {:e}, {spikes} spike(s)",
        w.iterations, w.final_residual
    );
    if run.stability {
        let rep = compute_spectrum(&w.profile, run.params.eps, &StabilityOptions::default())?;
        let header = out
            .header()
            .with("max_re", fmt_f64(rep.max_re))
            .with("verdict", format!("{:?}", rep.verdict));
        out.table("spectrum.csv", &spectrum_table(&rep.spectrum, header))?;
        body["max_re"] = json!(rep.max_re);
        body["verdict"] = value(&rep.verdict)?;
        body["spectrum"] = json!(rep.spectrum.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
        line += &format!(", max Re = {:e} ({:?})", rep.max_re, rep.verdict);
    }
    out.document("converged", body)?;
    println!("{line}");
    Ok(Outcome::Success)
}

fn tens_cmd(cfg: &RunConfig, run: &TensRun) -> CmdResult {
    run.params.validate()?;
    let tc = run.tens_config(cfg.seed);
    tc.validate()?;
    let out = Writer::new(cfg)?;
    let res = match tens::run(&run.params, &tc, &InitialCondition::Random) {
        Ok(r) => r,
        Err(Error::BlowUp { time }) => {
            out.document("blow_up", json!({ "time": time }))?;
            eprintln!("simulation blew up at t = {time}");
            return Ok(Outcome::BlowUp);
        }
        Err(e) => return Err(e.into()),
    };
    let header = out
        .header()
        .with("final_time", fmt_f64(res.final_time))
        .with("steady", res.steady.to_string());
    out.table("final.csv", &profile_table(&res.final_profile, header)?)?;
    let mut hist = Table::new(out.header(), &["t", "change_rate"]);
    for h in &res.history {
        hist.push_numbers(&[h.time, h.change_rate]);
    }
    out.table("history.csv", &hist)?;
    if !res.snapshots.is_empty() {
        let grid = res.final_profile.grid();
        let mut st = Table::new(out.header(), &["t", "eta", "psi"]);
        for s in &res.snapshots {
            for (eta, psi) in grid.iter().zip(&s.values) {
                st.push_numbers(&[s.time, *eta, *psi]);
            }
        }
        out.table("spacetime.csv", &st)?;
    }
    let status = if res.steady { "steady" } else { "not_steady" };
    out.document(
        status,
        json!({
            "steady": res.steady,
            "steady_time": res.steady_time,
            "final_time": res.final_time,
            "steps": res.steps,
            "mean_drift": res.mean_drift,
            "max_imag": res.max_imag,
            "seed": res.seed,
            "profile": profile_json(&res.final_profile),
        }),
    )?;
    match res.steady_time {
        Some(t) => println!("steady at t = {t}"),
        None => println!("not steady at t = {}", res.final_time),
    }
    Ok(if res.steady { Outcome::Success } else { Outcome::NotSteady })
}

fn scan_cmd(cfg: &RunConfig, run: &ScanRun) -> CmdResult {
    run.axes.validate()?;
    if run.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let out = Writer::new(cfg)?;
    match run.mode {
        ScanMode::Reduced => {
            let map = scan_reduced(&run.axes, &run.reduced_config())?;
            out.table("reduced_map.csv", &reduced_map_table(&map, out.header())?)?;
            out.document("done", value(&map)?)?;
            let regular = map.cells.iter().filter(|c| c.regular).count();
            println!("{} cells, {regular} regular", map.cells.len());
        }
        ScanMode::Full => {
            let mut map = scan_full(&run.axes, &run.full_config(cfg.seed))?;
            map.trace_neutral_curves(run.neutral_tol)?;
            out.table("flow_map.csv", &flow_map_table(&map, out.header())?)?;
            for c in &map.neutral_curves {
                let header = out.header().with("curve", c.name.as_str());
                out.table(&format!("neutral_{}.csv", c.name), &neutral_curve_table(std::slice::from_ref(c), header))?;
            }
            out.document("done", value(&map)?)?;
            let points: usize = map.neutral_curves.iter().map(|c| c.points.len()).sum();
            println!("{} cells, {points} neutral points", map.cells.len());
        }
    }
    Ok(Outcome::Success)
}
