//! Command-line driver for `bellsim-core`: resolves a run configuration,
//! executes one subcommand and writes a CSV or JSON artifact.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::run;
pub use config::{Cli, CommandKind, Format, Grid, RunConfig, StateChoice};
pub use error::{CliError, CliResult, ErrorKind};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "BELLSIM_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::validation(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // A pool may already exist when called more than once in-process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn write_artifact(cfg: &RunConfig, bytes: &[u8]) -> CliResult<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::validation(format!("cannot write output {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::validation(format!("cannot write to standard output: {e}")))
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let message = e.kind().to_string();
            let detail = e.to_string();
            let first = detail
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or(&message)
                .trim_start_matches("error: ");
            let err = CliError::validation(first.to_string());
            eprintln!("{}", err.to_line());
            return err.exit_code();
        }
    };
    let (kind, flags) = cli.command.split();
    let result = configure_threads()
        .and_then(|_| RunConfig::resolve(kind, &flags))
        .and_then(|cfg| run(&cfg).and_then(|bytes| write_artifact(&cfg, &bytes)));
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_line());
            err.exit_code()
        }
    }
}
