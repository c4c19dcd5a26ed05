use thiserror::Error;

/// Errors produced by the library.
///
/// The variants split into two families: problems with the *inputs*
/// (`Domain`, `Infeasible`, `Precondition`, `Unsupported`) and failures of a
/// numerical method on valid inputs (`Numeric`, `Integrity`).  The CLI maps
/// the first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numeric failure: {message} (best estimate {estimate:e}, error bound {error_bound:e})")]
    Numeric {
        message: String,
        estimate: f64,
        error_bound: f64,
    },

    #[error("integrity check failed: {0}")]
    Integrity(String),
}

impl Error {
    pub(crate) fn numeric(message: impl Into<String>, estimate: f64, error_bound: f64) -> Self {
        Error::Numeric {
            message: message.into(),
            estimate,
            error_bound,
        }
    }

    /// True for errors caused by bad physical inputs rather than by a
    /// numerical method failing.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Infeasible(_) | Error::Precondition(_) | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
