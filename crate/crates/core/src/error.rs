use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An integer argument lies outside the range an operation supports.
    #[error("range error: {0}")]
    Range(String),

    #[error("iteration cap of {cap} exceeded (last level {level})")]
    IterationCapExceeded { cap: u64, level: f64 },

    /// Two consecutive levels failed to increase strictly.
    #[error("level sequence stalled at iteration {iteration}: {previous} -> {current}")]
    LevelStalled {
        iteration: u64,
        previous: f64,
        current: f64,
    },

    #[error("root solver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid_params",
            Error::Range(_) => "range",
            Error::IterationCapExceeded { .. } => "iteration_cap_exceeded",
            Error::LevelStalled { .. } => "level_stalled",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::SingularSystem(_) => "singular_system",
        }
    }
}
