//! Command-line driver: argument and config resolution, orchestration of
//! sweeps, and serialization of results.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

use args::{Cli, Command};
use error::CliResult;

/// Runs a parsed command line. `env_workers` is the value of
/// [`config::WORKERS_ENV`], if set.
pub fn run(cli: &Cli, env_workers: Option<&str>) -> CliResult<()> {
    let file = config::load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Scan(a) => commands::scan(a, &file, env_workers),
        Command::Exponents(a) => commands::exponents(a, &file, env_workers),
        Command::Collapse(a) => commands::collapse(a, &file, env_workers),
        Command::Converge(a) => commands::converge(a, &file),
        Command::OracleCheck(a) => commands::oracle_check(a, &file),
    }
}
