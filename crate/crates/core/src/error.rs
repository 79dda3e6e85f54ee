use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear system has no solution (y is not in the range of the matrix)")]
    NoSolution,

    #[error("simplex iteration limit of {limit} reached")]
    IterationLimit { limit: usize },

    #[error("Frank-Wolfe did not converge: best value {best}, gap {gap} after {iterations} iterations")]
    NonConvergence {
        best: f64,
        gap: f64,
        iterations: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
