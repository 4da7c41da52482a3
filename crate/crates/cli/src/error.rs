use std::path::PathBuf;

use thiserror::Error;
use uavdeploy::DeployError;

/// Everything a command can fail with. Each variant maps to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid input at `{path}`: {reason}")]
    Input { path: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Solver(#[from] DeployError),
}

impl CliError {
    pub fn input(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input of any kind, 2 when the instance admits no solution.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if is_infeasible(e) => exit::INFEASIBLE,
            _ => exit::INPUT,
        }
    }

    /// Stable machine-readable kind, printed with infeasibility reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input { .. } => "input",
            CliError::Io { .. } => "io",
            CliError::Solver(e) => match e {
                DeployError::InvalidInstance { .. } => "invalid_instance",
                DeployError::Domain(_) => "domain",
                DeployError::Infeasible(_) => "infeasible",
                DeployError::Unsupported(_) => "unsupported",
                DeployError::DegenerateBound(_) => "degenerate_bound",
                DeployError::BudgetExhausted { .. } => "budget_exhausted",
                DeployError::TooLarge { .. } => "too_large",
                DeployError::Precondition(_) => "precondition",
                DeployError::GenerationFailed { .. } => "generation_failed",
                DeployError::InvalidArgument(_) => "invalid_argument",
            },
        }
    }
}

fn is_infeasible(e: &DeployError) -> bool {
    matches!(e, DeployError::Infeasible(_) | DeployError::BudgetExhausted { .. })
}

/// Process exit codes; scripts branch on these.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const COVERAGE_GAP: i32 = 3;
    pub const DELAY_MISMATCH: i32 = 4;
}

/// Instance-level errors keep their field path; everything else passes through.
pub(crate) fn from_instance_error(e: DeployError) -> CliError {
    match e {
        DeployError::InvalidInstance { path, reason } => CliError::Input { path, reason },
        other => CliError::Solver(other),
    }
}
