use thiserror::Error;

use crate::opalg::Factor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured maximum {max}")]
    Size { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("factor {0:?} is not part of the layout")]
    UnknownFactor(Factor),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("function is not finite on the spectrum (eigenvalue {eigenvalue})")]
    NonFinite { eigenvalue: f64 },

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incommensurate lattice: {0}")]
    Incommensurate(String),

    #[error("tick {tick} carries zero weight in the history state")]
    ZeroWeight { tick: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
