use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("log-gamma pole at non-positive integer {0}")]
    Pole(f64),

    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error("quadrature did not converge: error estimate {error:.3e} after {panels} panels")]
    QuadratureNonConvergence { error: f64, panels: usize },

    #[error("root finder failed: {0}")]
    RootNotFound(String),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("series truncation not converged: bound {bound:.3e} exceeds {allowed:.3e}")]
    TruncationNotConverged { bound: f64, allowed: f64 },

    #[error("design matrix is rank deficient (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("alpha0 = {0} is too close to the interpolation threshold")]
    SingularAlpha0(f64),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
