use thiserror::Error;

/// Errors raised by the covering, field and integration pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("root finder failed to converge within the iteration budget")]
    SolverDivergence,

    #[error("root clusters cannot be separated at the working perturbation")]
    AmbiguousCluster,

    #[error("fiber swap detected inside a derivative stencil: {0}")]
    BranchJump(String),

    #[error("radius degenerates below tolerance (||p^[a]|| < 1e-12)")]
    DegenerateRadius,

    #[error("point is not on the boundary (|rho| = {0:.3e})")]
    NotOnBoundary(f64),

    #[error("defining function has vanishing gradient at the evaluation point")]
    VanishingGradient,

    #[error("integration region escapes the base domain")]
    RegionEscapesDomain,

    #[error("log singularity: alpha in (0,1) with r = 1")]
    LogSingularity,

    #[error("invalid covering specification: {0}")]
    InvalidCovering(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type Result<T> = std::result::Result<T, Error>;
