use thiserror::Error;

#[derive(Debug, Error)]
pub enum FloquetError {
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("{n_sites} sites exceeds the dense cap of {cap}")]
    DenseCapExceeded { n_sites: usize, cap: usize },

    #[error("time {t} outside the drive cycle [0, {cycle}]")]
    TimeOutsideCycle { t: f64, cycle: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid coupling graph: {0}")]
    InvalidGraph(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailed(String),

    #[error("pulse profile is not cyclic: {0}")]
    CyclicityViolation(String),

    #[error("singular engineering condition: {0}")]
    SingularCondition(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("norm drift {drift:e} exceeds limit {limit:e} at t = {t}")]
    NormDrift { drift: f64, limit: f64, t: f64 },

    #[error("trajectory sample grids do not match: {0}")]
    GridMismatch(String),

    #[error("operator is not Hermitian")]
    NotHermitian,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FloquetError> = std::result::Result<T, E>;
