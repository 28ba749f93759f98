use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes reachable through the public API. Numerical routines
/// never panic on user inputs; they return one of these.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("region contains no interior nodes")]
    EmptyRegion,

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("node {node} is not an interior node of the unit ball")]
    OutsideMask { node: usize },

    #[error("grids of the two operands do not match")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gradient direction is zero and epsilon is zero; the operator is singular there")]
    SingularDirection,

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("solver did not converge: residual {residual_norm:.3e} after {iterations} iterations (tol {tol:.3e})")]
    NoConvergence {
        residual_norm: f64,
        iterations: usize,
        tol: f64,
        /// Best iterate and its history, for diagnosis.
        report: Box<crate::solver::SolveReport>,
    },

    #[error("inputs are too close to equal: |a - b| <= {tol:.1e} * max(|a|,|b|)")]
    NearEqualPair { tol: f64 },
}
