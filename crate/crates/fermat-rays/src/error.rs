use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A query outside the mathematical domain of an operation
    /// (point not covered by any chart, zero vector where a direction is
    /// required, too few curve samples, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of the data was violated at an evaluated
    /// point (beta <= 0, |omega| >= 1, g(W,W) >= 1, loss of positive
    /// definiteness, ...).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// An integral curve left the chart atlas.
    #[error("trajectory escaped the atlas at parameter {exit_param}")]
    Escape { exit_param: f64 },

    /// The adaptive step size underflowed.
    #[error("step size underflow at parameter {0}; problem too stiff for the requested tolerance")]
    Stiffness(f64),

    /// Bad configuration: unparsable expression, unknown geometry,
    /// missing bounds or seed, inconsistent dimensions.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the CLI: configuration errors are 2,
    /// everything else is an invariant-style failure, 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
