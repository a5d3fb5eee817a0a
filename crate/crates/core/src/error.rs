use thiserror::Error;

/// Errors surfaced by the estimators and distribution kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Argument outside a distribution's domain (e.g. non-positive alpha,
    /// matrix outside the unit-eigenvalue cone).
    #[error("domain error: {0}")]
    Domain(String),

    /// Data in non-general position: singular scatter, n < p+1, ties that
    /// break a required factorization.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Non-finite weight or failed factorization deep in a sampler. Never
    /// swallowed: a NaN here means a density is wrong.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
