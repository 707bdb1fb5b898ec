use thiserror::Error;

/// Errors raised by the numerical kernels and channel models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func}: {detail}")]
    Overflow { func: &'static str, detail: String },

    #[error("{func} did not converge after {terms} terms (partial value {partial:e})")]
    NonConvergence {
        func: &'static str,
        partial: f64,
        terms: usize,
    },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64, tol: f64 },

    #[error("degenerate UAV orientation: {0}")]
    DegenerateOrientation(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("SNR regime mismatch: {0}")]
    Regime(String),

    #[error("configuration parse error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
