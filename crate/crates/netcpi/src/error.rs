//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the netcpi library.
///
/// Variants are grouped so callers can map them onto coarse classes:
/// [`Error::is_data_error`] covers malformed or inconsistent inputs, while
/// [`Error::is_numeric_error`] covers singular or non-productive systems.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or vector does not match the dimensions implied by the
    /// sector/factor/import lists.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: String,
        got: String,
    },

    /// An accounting identity failed validation.
    #[error("validation failed for {context}: {failures} identity violation(s), worst residual {worst:.3e}")]
    ValidationFailed {
        context: String,
        failures: usize,
        worst: f64,
    },

    /// The intermediate-input matrix admits no Leontief inverse.
    #[error("non-productive economy: spectral radius of the input matrix is {rho} (must be < 1)")]
    NonProductive { rho: f64 },

    /// A linear system was too ill-conditioned to solve reliably.
    #[error("{context}: system is numerically singular (reciprocal condition {rcond:.3e})")]
    Singular { context: String, rcond: f64 },

    /// A value that must be strictly positive (or within bounds) was not.
    #[error("invalid input for {what}: {detail}")]
    InvalidInput { what: String, detail: String },

    /// A sector aggregation mapping is not a usable surjection.
    #[error("aggregation error: {0}")]
    Aggregation(String),

    /// An input file violates the documented schema.
    #[error("schema error in {path} (line {line}): {detail}")]
    Schema {
        path: String,
        line: usize,
        detail: String,
    },

    /// A shock series is missing its base period or has ragged dates.
    #[error("shock series error: {0}")]
    ShockSeries(String),

    /// Two-way fixed effects design is not identified.
    #[error("fixed-effects design not identified: {0}")]
    Identification(String),

    /// The dynamic model failed to linearize or simulate.
    #[error("dynamic model error in `{equation}`: {detail}")]
    DynamicModel { equation: String, detail: String },

    /// Underlying I/O failure while reading an input file.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::ValidationFailed { .. }
                | Error::InvalidInput { .. }
                | Error::Aggregation(_)
                | Error::Schema { .. }
                | Error::ShockSeries(_)
                | Error::Identification(_)
                | Error::Io { .. }
        )
    }

    /// True for errors raised by the numerical kernels (singular systems,
    /// non-productive economies, failed simulations).
    pub fn is_numeric_error(&self) -> bool {
        matches!(
            self,
            Error::NonProductive { .. } | Error::Singular { .. } | Error::DynamicModel { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
