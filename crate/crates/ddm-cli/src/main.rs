//! `ddm`: train, probe, and evaluate directional diffusion models on
//! graph datasets.
//!
//! Usage: `ddm <train|extract|eval|snr|svdviz|ellipse|gen> [--config <path>]
//! [--key value ...]`. The environment variable `DDM_SEED` overrides the
//! configured seed. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 numeric failure.

mod commands;
mod config;

use ddm_core::Error;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Numeric(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

const USAGE: &str = "usage: ddm <train|extract|eval|snr|svdviz|ellipse|gen> [--config <path>] [--key value ...]";

fn dispatch() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return Err(CliError::Usage(USAGE.into()));
    };
    let cfg = config::parse_config(&args[1..])?;
    match command.as_str() {
        "train" => commands::cmd_train(&cfg),
        "extract" => commands::cmd_extract(&cfg),
        "eval" => commands::cmd_eval(&cfg),
        "snr" => commands::cmd_snr(&cfg),
        "svdviz" => commands::cmd_svdviz(&cfg),
        "ellipse" => commands::cmd_ellipse(&cfg),
        "gen" => commands::cmd_gen(&cfg),
        other => Err(CliError::Usage(format!(
            "unknown command {other:?}\n{USAGE}"
        ))),
    }
}

fn main() {
    let start = Instant::now();
    match dispatch() {
        Ok(()) => {
            eprintln!("elapsed_seconds {:.3}", start.elapsed().as_secs_f64());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
