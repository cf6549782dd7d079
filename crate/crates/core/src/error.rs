use std::path::PathBuf;

use thiserror::Error;

use crate::schemes::SchemeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:.3e})")]
    NotPositiveDefinite { lambda_min: f64 },

    /// The drawn sketch produced a zero (or non-positive) denominator. The
    /// solver treats this as a skipped step rather than a failure.
    #[error("degenerate step for {scheme}: {reason}")]
    DegenerateStep { scheme: SchemeId, reason: String },

    #[error("invalid scheme configuration: {0}")]
    InvalidScheme(String),

    #[error("invalid sketch: {0}")]
    InvalidSketch(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn is_degenerate_step(&self) -> bool {
        matches!(self, Error::DegenerateStep { .. })
    }

    pub(crate) fn dims(
        op: &'static str,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
