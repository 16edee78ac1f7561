//! Command-line front end: argument parsing, report assembly and the
//! reproduction suite.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

pub mod args;
pub mod commands;
pub mod networks;
pub mod report;
pub mod reproduce;

use args::{Cli, Command, OutputFormat};
use report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_RESOURCE_GUARD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Overrides the dense-oracle qubit cap.
pub const DENSE_CAP_VAR: &str = "BELLNET_DENSE_CAP";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bellnet_core::Error),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_resource_guard() => EXIT_RESOURCE_GUARD,
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub dense_cap: usize,
    pub seed: u64,
}

fn dispatch(cli: &Cli, ctx: &Context, report: &mut RunReport) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { file } => commands::validate(file, report),
        Command::Operators { file } => commands::operators(file, report),
        Command::Bounds { ma, uvw, p } => commands::bounds(*ma, *uvw, p.unwrap_or(1.0), report),
        Command::Quantum {
            file,
            p,
            dense_check,
            sos,
        } => commands::quantum(file, *p, *dense_check, *sos, ctx, report),
        Command::Sweep { file, p, grid } => commands::sweep(file, *p, *grid, report),
        Command::Bruteforce {
            file,
            p,
            mixture,
            restarts,
        } => commands::bruteforce(file, *p, *mixture, *restarts, ctx, report),
        Command::Ns { file, p } => commands::ns(file, *p, report),
        Command::Classify { file, uvw, p } => commands::classify_cmd(file.as_deref(), *uvw, *p, report),
        Command::ReproducePaper { networks, grid } => {
            reproduce::reproduce(ctx, networks.as_deref(), *grid, report)
        }
    }
}

/// Runs one command, writing the report to `out` and diagnostics to
/// standard error. Returns the process exit code.
pub fn run<I, T>(argv: I, dense_cap: usize, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let ctx = Context {
        dense_cap,
        seed: cli.seed,
    };
    let start = Instant::now();
    let mut report = RunReport::new(argv.iter().map(|a| a.to_string_lossy().into_owned()).collect());
    let outcome = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &ctx, &mut report)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(&cli, &ctx, &mut report),
    };
    report.wall_time_ms = start.elapsed().as_millis() as u64;

    if let Err(e) = outcome {
        match &e {
            CliError::Core(bellnet_core::Error::InvalidNetwork(diags)) => {
                for d in diags {
                    eprintln!("error: {d}");
                }
            }
            _ => eprintln!("error: {e}"),
        }
        return e.exit_code();
    }
    let text = match cli.output {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Table => report.to_table(),
    };
    if writeln!(out, "{}", text.trim_end()).is_err() {
        return EXIT_FAILURE;
    }
    if report.failed() {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

/// Dense cap from the environment, falling back to the library default.
pub fn dense_cap_from_env() -> Result<usize, String> {
    match std::env::var(DENSE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{DENSE_CAP_VAR}={v:?} is not a qubit count")),
        Err(_) => Ok(bellnet_core::quantum::DEFAULT_DENSE_CAP),
    }
}
