use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {requested} exceeds ceiling {ceiling}")]
    DimensionCeiling { requested: usize, ceiling: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:.3e}, tolerance {tol:.3e})")]
    NotConverged {
        iterations: usize,
        best_residual: f64,
        tol: f64,
    },

    #[error("dense eigensolver failed: {0}")]
    Solver(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("extremum at grid boundary (gamma = {gamma}); widen the sweep range")]
    Boundary { gamma: f64 },

    #[error("fidelity minimum at gamma = {fidelity_gamma} and susceptibility maximum at gamma = {chi_gamma} disagree by more than one grid step")]
    Inconsistent { fidelity_gamma: f64, chi_gamma: f64 },

    #[error("sweep finished with {failed} failed point(s); first failure: {first}")]
    SweepFailed { failed: usize, first: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
