use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A strictly increasing spectrum was required but coordinates coincide.
    #[error("degenerate spectrum: minimal gap {min_gap:e} (strictly increasing coordinates required)")]
    DegenerateSpectrum { min_gap: f64 },

    /// Knots are too clustered for the explicit spline sum to be trusted.
    #[error("ill-conditioned knots: relative minimal gap {ratio:e} is below {threshold:e}")]
    Conditioning { ratio: f64, threshold: f64 },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("range error: {0}")]
    Range(String),
}

impl Error {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Argument(_) | Error::DegenerateSpectrum { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
