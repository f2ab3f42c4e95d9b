//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulator, model, kernel, SVM, noise and data routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was non-finite, out of its allowed range, or otherwise malformed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A qubit index did not fit the register.
    #[error("qubit index {index} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    /// Control and target of a two-qubit gate coincide.
    #[error("control and target must differ (both {0})")]
    ControlEqualsTarget(usize),

    /// Two operands had incompatible sizes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A precondition of the requested operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Input that the algorithm cannot handle (e.g. single-class SVM labels).
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    /// File became unreadable/unwritable or had a malformed payload.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A serialized artifact failed to parse.
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
