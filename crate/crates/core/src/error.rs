use thiserror::Error;

/// Errors raised by filters, mixers, theory routines and the ensemble harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("regressor has zero energy and regularization is zero")]
    DegenerateRegressor,

    #[error("inverse correlation matrix lost positive definiteness")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cross-EMSE violates Cauchy-Schwarz: zeta12^2 = {z12_sq:e} > zeta1*zeta2 = {bound:e}")]
    CauchySchwarz { z12_sq: f64, bound: f64 },

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("no output supplied for leaf {0}")]
    MissingLeaf(usize),

    #[error("run {run} diverged at sample {n}")]
    Diverged { run: usize, n: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
