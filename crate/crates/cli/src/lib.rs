//! Batch driver for the hyperhaar experiments.
//!
//! Every subcommand writes one self-describing report and maps its outcome to an
//! exit code: 0 success, 1 usage or configuration error, 2 capacity exceeded,
//! 3 an invariant check failed.

mod args;
mod commands;
mod report;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use hyperhaar::HyperHaarError;

pub use args::{Cli, Command};
pub use report::SCHEMA;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Configuration problems found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<HyperHaarError>() {
        Some(HyperHaarError::Capacity { .. } | HyperHaarError::InsufficientResolution { .. } | HyperHaarError::Budget(_)) => {
            EXIT_CAPACITY
        }
        Some(HyperHaarError::CertificateUndefined(_) | HyperHaarError::NotAdmissible(_)) => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

/// Caps rayon's pool at `HYPERHAAR_THREADS` when set.
fn configure_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("HYPERHAAR_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| UsageError(format!("HYPERHAAR_THREADS must be a positive integer, got {raw:?}")))?;
    // A second call in the same process finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match commands::dispatch(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_INVARIANT,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
