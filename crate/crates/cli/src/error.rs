use std::fmt;

use dicke_core::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A check ran to completion and failed, or output could not be written.
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Solver(String),
    NotConverged(String),
    Failed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Solver(_) => exit::SOLVER,
            CliError::NotConverged(_) => exit::NOT_CONVERGED,
            CliError::Failed(_) | CliError::Io(_) => exit::FAILURE,
        }
    }

    /// Prefixes the message, keeping the category.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Solver(m) => CliError::Solver(format!("{what}: {m}")),
            CliError::NotConverged(m) => CliError::NotConverged(format!("{what}: {m}")),
            CliError::Failed(m) => CliError::Failed(format!("{what}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::DimensionCeiling { .. }
            | Error::DimensionMismatch(_)
            | Error::Parse { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
