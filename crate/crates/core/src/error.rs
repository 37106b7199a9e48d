use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::decomposition::BirkhoffResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} needs dimension {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("division domain: {0}")]
    DivisionDomain(String),

    /// The eigensolver ran out of iterations or failed its residual check.
    /// `partial` holds whatever eigenvalues had converged.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        partial: Vec<Complex64>,
    },

    #[error("sinkhorn did not converge in {iterations} iterations (max deviation {deviation:e})")]
    NonConvergence {
        iterations: usize,
        deviation: f64,
        last_iterate: Vec<f64>,
    },

    #[error("birkhoff decomposition failed: {message}")]
    DecompositionFailure {
        message: String,
        partial: Box<BirkhoffResult>,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
