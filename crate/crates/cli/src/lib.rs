//! Command-line front end of `chwave`.
//!
//! Exit codes: 0 success, 1 error, 2 singular reduced solution or
//! non-steady simulation, 3 Newton failure or simulation blow-up,
//! 64 invalid usage.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
pub use commands::{execute, Failure, Outcome};
pub use config::{Command, Format, FullRun, Method, ReducedRun, RunConfig, ScanMode, ScanRun, TensRun};

pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    if cli.print_config {
        return match cfg.to_toml() {
            Ok(t) => {
                print!("{t}");
                0
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_ERROR
            }
        };
    }
    match execute(&cfg) {
        Ok(outcome) => outcome.exit_code(),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun with --help for usage.");
            EXIT_USAGE
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
