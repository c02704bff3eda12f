use thiserror::Error;

use crate::solver::SolveFailure;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient matrix is undefined at the origin")]
    OriginEvaluation,

    #[error("ellipticity lost: 1 + epsilon = {0} must be positive")]
    Ellipticity(f64),

    #[error("dimension mismatch: model expects {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("field metadata has no growth exponent beta")]
    MissingBeta,

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("rescaling radius {r} outside the resolvable window ({lo}, {hi}]")]
    RescaleWindow { r: f64, lo: f64, hi: f64 },

    #[error("dyadic levels under-resolved: {0}")]
    UnderResolved(String),

    #[error("degenerate fit window: only {usable} levels above the floor (need 4)")]
    DegenerateWindow { usable: usize },

    #[error("field does not cover the required window: {0}")]
    Coverage(String),

    #[error("profile did not return to zero before theta = 4 pi")]
    NonReturn,

    #[error("quadrature failed: achieved error estimate {achieved:e} above tolerance {tolerance:e}")]
    Quadrature { achieved: f64, tolerance: f64 },

    #[error("solver failed at stage {} (delta = {:e}): {}", .0.stage, .0.delta, .0.reason)]
    NonConvergence(Box<SolveFailure>),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("artifact error: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
