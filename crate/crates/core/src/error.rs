use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is valid but outside the supported parameter box.
    #[error("capability error: {0}")]
    Capability(String),
    /// Evaluation at (or numerically at) a pole.
    #[error("pole: {0}")]
    Pole(String),
    /// Coefficients would be too badly conditioned to trust.
    #[error("conditioning error: {0}")]
    Conditioning(String),
    /// A Moebius transformation sent the point to the cusp at infinity.
    #[error("point maps to a cusp")]
    MapsToCusp,
    /// Adaptive quadrature ran out of panels before meeting its tolerance.
    #[error("panel budget exhausted: estimate {estimate} with error {error}")]
    Budget { estimate: f64, error: f64 },
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical limits.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
