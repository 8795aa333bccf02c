use thiserror::Error;

/// Errors raised by the numerics, EM and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A function evaluation produced a non-finite value.
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// The starting point lies outside the region where the convergence
    /// guarantees hold.
    #[error("precondition violated: {what} (admissible radius {radius:.6}, got {value:.6})")]
    Radius {
        what: String,
        radius: f64,
        value: f64,
    },

    #[error("degenerate variance at iteration {iteration}: denominator {denominator:.3e}")]
    DegenerateVariance { iteration: usize, denominator: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for usage/config problems,
    /// 3 for numerical/domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::NumericalDomain(_) | Error::Radius { .. } | Error::DegenerateVariance { .. } => 3,
        }
    }
}
