//! `fermi-cavity`: command-line front end for the cavity numerics.
//!
//! Exit codes: 0 success, 1 domain error (bad physical input), 2 numeric
//! failure (tolerance not met), 64 usage or schema error.

mod args;
mod commands;
mod config;
mod output;
mod repro;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use crate::args::Cli;

pub const SCHEMA: &str = "fermi-cavity/1";

pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

/// Raised for invalid command lines, configs or input files; maps to exit 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(dispatch(std::env::args_os().collect()))
}

fn dispatch(argv: Vec<OsString>) -> u8 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match parser().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return EXIT_USAGE;
    }
    match commands::run(&cli).and_then(|out| output::emit(&out, &cli.global)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// The argument parser, with later occurrences of a flag overriding earlier
/// ones so that config entries (appended last) win.
fn parser() -> clap::Command {
    fn override_self(cmd: clap::Command) -> clap::Command {
        cmd.args_override_self(true).mut_subcommands(override_self)
    }
    override_self(Cli::command())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<fermi_cavity::Error>() {
        Some(fermi_cavity::Error::Numeric { .. }) => EXIT_NUMERIC,
        _ => EXIT_DOMAIN,
    }
}

/// FERMI_CAVITY_THREADS caps the worker pool used inside the library.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("FERMI_CAVITY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| UsageError(format!("FERMI_CAVITY_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}
