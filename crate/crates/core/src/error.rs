//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the supported domain (bad dimension, negative volume, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine stopped at its budget without certifying the
    /// requested tolerance. Carries the best value reached and its error bound.
    #[error("tolerance not met in {what}: best value {best:.17e}, error bound {err:.3e}")]
    ToleranceNotMet { what: String, best: f64, err: f64 },

    /// Bracket expansion failed; the sought quantity appears unbounded.
    #[error("bracketing failed: {0}")]
    Unbounded(String),

    /// Derivative requested at a kink of a piecewise function.
    #[error("nonsmooth point at {x:?}")]
    NonsmoothPoint { x: Vec<f64> },

    /// Least-squares system for a power-law fit was degenerate.
    #[error("singular fit: {0}")]
    SingularFit(String),

    /// Bad configuration file or command line.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract: 1 for config/domain problems, 2 when a numeric
    /// tolerance could not be certified.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ToleranceNotMet { .. } => 2,
            _ => 1,
        }
    }
}
