use thiserror::Error;

use crate::power::InfeasibilityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("singular effective channel (condition number {condition:.3e})")]
    SingularEffectiveChannel { condition: f64 },

    #[error("infeasible constraint system: {0}")]
    Infeasible(InfeasibilityReport),

    #[error("subsolver did not converge after {iterations} iterations (KKT residual {kkt_residual:.3e})")]
    SolverNonConvergence { iterations: usize, kkt_residual: f64 },

    #[error("search space too large ({size} candidates); exhaustive search is limited to K <= 8, G <= 3, N_beam <= 16")]
    SearchSpaceTooLarge { size: u128 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
