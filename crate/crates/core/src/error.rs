use thiserror::Error;

/// Errors raised by instance construction and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeployError {
    #[error("invalid instance at `{path}`: {reason}")]
    InvalidInstance { path: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate search bounds: {0}")]
    DegenerateBound(String),

    #[error("delay budget exhausted: covered {covered} of {beta} with {steps} grid steps")]
    BudgetExhausted { covered: f64, beta: f64, steps: usize },

    #[error("fleet of {n} agents exceeds the exhaustive limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl DeployError {
    pub(crate) fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        DeployError::InvalidInstance {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, DeployError>;
