use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A pair of coordinates is closer than the singularity guard.
    #[error("point lies on the singular set (gap {gap:e} between x{i} and x{j})")]
    OnSingularSet { i: usize, j: usize, gap: f64 },

    #[error("weight exponent {alpha} <= -1 is not integrable at the endpoint")]
    NonIntegrable { alpha: f64 },

    /// Adaptive refinement ran out of budget; carries the best estimate so far.
    #[error("quadrature did not converge: best value {value:e} with error estimate {error:e}")]
    NoConvergence { value: f64, error: f64 },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
