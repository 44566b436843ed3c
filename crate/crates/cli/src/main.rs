//! `canontime` command-line front end.
//!
//! Exit status: 0 on success, 2 for malformed input, 3 when a numerical
//! contract (coverage, monotonicity, completeness, ...) is violated. Errors
//! are written to stderr as a single JSON object.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::Cli;

/// Thread count for the worker pool; defaults to the available parallelism.
pub const THREADS_ENV: &str = "CANONTIME_THREADS";

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn report(kind: &str, message: &str, code: u8) -> ExitCode {
    let err = json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{err}");
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report("Usage", e.to_string().trim(), EXIT_INVALID),
    };
    if let Err(msg) = configure_threads() {
        return report("Usage", &msg, EXIT_INVALID);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID };
            report(e.kind(), &e.to_string(), code)
        }
    }
}
