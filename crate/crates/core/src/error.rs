use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("field is not resolved: {0}")]
    Unresolved(String),
    #[error("mismatched grids")]
    GridMismatch,
    #[error("did not converge after {iterations} iterations (last gap {achieved:e})")]
    NonConvergence { iterations: usize, achieved: f64 },
    #[error("quadrature did not reach tolerance (achieved {achieved:e})")]
    Quadrature { achieved: f64 },
    #[error("non-finite state at t = {t}")]
    Diverged { t: f64, last_good: Box<crate::evolution::Trajectory> },
    #[error("mass left the interior mask at t = {t}")]
    MassEscape { t: f64 },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
