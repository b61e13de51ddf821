use thiserror::Error;

/// Errors produced by the laboratory's numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field does not live on the expected grid")]
    GridMismatch,

    #[error("forcing term is invalid: {0}")]
    InvalidForcing(String),

    #[error("tempered family is invalid: {0}")]
    InvalidFamily(String),

    #[error("solution lost finiteness at t = {time} (blow-up or misconfigured model)")]
    BlowUp { time: f64 },

    #[error("Newton iteration failed to converge at t = {time} after {iterations} iterations")]
    NewtonDivergence { time: f64, iterations: usize },

    #[error("linear system is numerically singular at row {row}")]
    SingularMatrix { row: usize },

    #[error("tail radius {radius} exceeds the observable limit {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("set of fields is empty")]
    EmptySet,

    #[error("trajectory is missing the diagnostics required for this functional")]
    MissingDiagnostics,
}

pub type Result<T> = std::result::Result<T, Error>;
