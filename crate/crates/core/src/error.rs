use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: resolution {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sample too small: {reason}")]
    TooSmall { reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("nonstationary parameters: sup-norm {sup_norm:.3e} exceeded the divergence threshold at step {step}")]
    Nonstationary { step: usize, sup_norm: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("degenerate long-run covariance")]
    DegenerateCovariance,

    #[error("regressor spectrum too small for requested L = {requested} (eigenvalue {eigenvalue:.3e} below floor {floor:.3e})")]
    SpectrumTooSmall { requested: usize, eigenvalue: f64, floor: f64 },

    #[error("unsupported critical value request: d = {d}, level = {level}")]
    UnsupportedQuantile { d: usize, level: f64 },

    #[error("parse error at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Numeric(_)
                | Error::Nonstationary { .. }
                | Error::DegenerateCovariance
                | Error::SpectrumTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
