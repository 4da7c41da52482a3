//! Command-line front end for the `uavdeploy` solvers: instance files,
//! solver dispatch, parameter sweeps, timing benches and plot data.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 infeasible, 3 coverage
//! gap, 4 delay mismatch.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod svg;
pub mod sweep;

use std::ffi::OsString;

use clap::Parser;

pub use error::{exit, CliError};

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            if code == exit::INFEASIBLE {
                let reason = serde_json::json!({"status": "infeasible", "kind": e.kind(), "reason": e.to_string()});
                print!("{}", io::to_json(&reason));
            }
            eprintln!("error: {e}");
            code
        }
    }
}
