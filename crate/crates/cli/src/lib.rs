//! `qdiff` command-line front end: argument handling, file formats and rendering.

pub mod args;
pub mod commands;
pub mod error;
pub mod formats;
pub mod render;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

/// Worker count from `QDIFF_THREADS`; 0 or unset means automatic.
pub fn thread_count() -> CliResult<usize> {
    match std::env::var("QDIFF_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(_) => Err(CliError::usage("QDIFF_THREADS is not valid unicode")),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("QDIFF_THREADS must be a non-negative integer, got `{v}`"))),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::BasisCheck(a) => commands::basis_check::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Blob(a) => commands::blob::run(a),
        Command::Deform(a) => commands::deform::run(a),
        Command::Render(a) => commands::render::run(a),
    }
}

fn try_run<I, T>(argv: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            commands::say(e.to_string().trim_end());
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::usage(first.trim_start_matches("error:").trim()));
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::runtime("threads", e.to_string()))?;
    pool.install(|| dispatch(&cli))
}

/// Runs the tool and returns the process exit status; errors go to stderr
/// as a single `error: <code>: <message>` line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match try_run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.kind.status()
        }
    }
}
