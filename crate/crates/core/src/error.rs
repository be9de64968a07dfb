use thiserror::Error;

/// Errors raised by the simulator, the observable extraction and the fits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("invariant violated at t = {t:e} s: {detail}")]
    InvariantViolation { t: f64, detail: String },

    #[error("p(t) peaks at the edge of the integration window (t = {t:e} s)")]
    PeakAtBoundary { t: f64 },

    #[error("cannot locate the half-maximum crossings: {0}")]
    HalfMaximum(String),

    #[error("efficiency {0} exceeds unity beyond rounding")]
    EfficiencyAboveUnity(f64),

    #[error("not enough data to fit: {0}")]
    InsufficientData(String),

    #[error("fit parameter is not identifiable: {0}")]
    Unidentifiable(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("adiabaticity not satisfied (T / threshold = {margin:.3})")]
    NotAdiabatic { margin: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
