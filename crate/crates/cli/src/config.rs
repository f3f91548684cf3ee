//! Configuration files and small argument parsers.
//!
//! A config file is flat TOML whose keys are the long flag names, e.g.
//!
//! ```toml
//! n-atoms = 100
//! gamma-min = 0.5
//! n-list = "100,200,300"
//! emit-plot = true
//! ```
//!
//! Values given on the command line win over the file, which wins over the
//! built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::Criterion;
use crate::error::{CliError, CliResult};

pub const WORKERS_ENV: &str = "DICKE_WORKERS";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub n_atoms: Option<u32>,
    pub n_list: Option<String>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub dgamma: Option<f64>,
    pub nmax: Option<usize>,
    pub omega: Option<f64>,
    pub omega0: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub emit_plot: Option<bool>,
    pub refine: Option<bool>,
    pub nu: Option<f64>,
    pub spread_width: Option<f64>,
    pub gamma: Option<f64>,
    pub tolerance: Option<f64>,
    pub criterion: Option<Criterion>,
    pub nmax_start: Option<usize>,
    pub nmax_ceiling: Option<usize>,
    pub gamma_list: Option<String>,
    pub cutoff: Option<usize>,
}

pub fn parse_config(text: &str) -> CliResult<FileConfig> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
}

pub fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| e.context(&p.display().to_string()))
        }
    }
}

/// Flag, then config file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// `N=path`, as given to `collapse --scan`.
pub fn parse_scan_input(s: &str) -> CliResult<(u32, PathBuf)> {
    let (n, path) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected N=path, got '{s}'")))?;
    let n: u32 = n
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("'{n}' is not a positive atom number")))?;
    if path.is_empty() {
        return Err(CliError::Usage(format!("missing path in '{s}'")));
    }
    Ok((n, PathBuf::from(path)))
}

/// Worker count: the environment variable, then the flag or config value,
/// then the machine's available parallelism.
pub fn resolve_workers(env: Option<&str>, configured: Option<usize>) -> CliResult<usize> {
    let n = match env {
        Some(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!("{WORKERS_ENV}='{v}' is not a worker count"))
        })?,
        None => match configured {
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    Ok(n)
}
