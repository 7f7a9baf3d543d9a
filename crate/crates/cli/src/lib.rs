//! Library side of the batch pipeline driver: argument types, config
//! resolution, manifests, checkpoints, and the subcommand implementations.
//! The `topogcl` binary is a thin wrapper over [`run`].

pub mod args;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod manifest;

use clap::Parser;
use topogcl_core::{Error, Result};

use crate::args::{Cli, Command};

/// Error-to-exit-code policy: numerical failures (3) are distinguishable
/// from bad configuration or inputs (2) in scripts.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalFailure { .. } => 3,
        _ => 2,
    }
}

/// Sizes the global worker pool from `TOPOGCL_THREADS` when set.
pub fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("TOPOGCL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().map_err(|_| {
        Error::invalid(format!(
            "TOPOGCL_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    if threads == 0 {
        return Err(Error::invalid("TOPOGCL_THREADS must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::invalid(format!("cannot size the thread pool: {e}")))
}

/// Parses the process arguments and runs the selected subcommand.
pub fn run() -> Result<()> {
    init_thread_pool()?;
    match Cli::parse().command {
        Command::Augment(args) => commands::augment::run(&args),
        Command::Train(args) => commands::train::run(&args),
        Command::Eval(args) => commands::eval::run(&args),
        Command::Ablate(args) => commands::ablate::run(&args),
        Command::SbmGen(args) => commands::sbm::run(&args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_separate_config_from_numerics() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::malformed("x")), 2);
        assert_eq!(exit_code(&Error::numerical("diverged", Some(1.0))), 3);
        let io = Error::from(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(exit_code(&io), 2);
    }
}
