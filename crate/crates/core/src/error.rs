use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set was rejected (usually a sieve band violation without `force`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The requested computation would exceed the memory budget.
    #[error("capacity exceeded: {what} needs {requested}, budget is {budget}")]
    Capacity {
        what: &'static str,
        requested: u128,
        budget: u128,
    },

    /// An operation was called before a required preparation step.
    #[error("state error: {0}")]
    State(String),

    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },

    /// Bad command line or configuration input.
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
