//! Error taxonomy shared by all modules.
//!
//! Each variant corresponds to one failure class surfaced by the CLI as a
//! machine-readable code and a process exit status:
//!
//! | variant                                   | exit |
//! |-------------------------------------------|------|
//! | `Input`, `Parameter`, `Contract`, `Lookup`| 2    |
//! | `Numeric`, `Quadrature`                   | 3    |
//! | `Io`                                      | 4    |

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum FxtsError {
    /// Malformed input data (dimension mismatch, non-finite state, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Parameter outside the hypothesis range of the formula it feeds.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An operation was called on data that does not satisfy its contract
    /// (e.g. a path integral on a field not declared a gradient field).
    #[error("contract error: {0}")]
    Contract(String),

    /// Unknown catalog or formula identifier.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// Numerical failure (overflow, eigensolver breakdown, step-size collapse).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Quadrature did not converge to the requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// Filesystem failure while emitting artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl FxtsError {
    /// Stable machine-readable code for JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            FxtsError::Input(_) => "input",
            FxtsError::Parameter(_) => "parameter",
            FxtsError::Contract(_) => "contract",
            FxtsError::Lookup(_) => "lookup",
            FxtsError::Numeric(_) => "numeric",
            FxtsError::Quadrature(_) => "quadrature",
            FxtsError::Io(_) => "io",
        }
    }

    /// Process exit status class for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            FxtsError::Input(_)
            | FxtsError::Parameter(_)
            | FxtsError::Contract(_)
            | FxtsError::Lookup(_) => 2,
            FxtsError::Numeric(_) | FxtsError::Quadrature(_) => 3,
            FxtsError::Io(_) => 4,
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FxtsError>;
