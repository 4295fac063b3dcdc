use crate::solver::OperatorStats;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("field shape mismatch: expected {expected} values, got {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("immersion is rank deficient at node {node} (det g = {det:e})")]
    RankDeficient { node: usize, det: f64 },
    #[error("iterative solve did not converge: {0}")]
    NoConvergence(OperatorStats),
    #[error("minimal immersion with incompatible right-hand side (relative mean {relative_mean:e})")]
    MinimalIncompatibleRhs { relative_mean: f64 },
    #[error("operation requires a non-minimal immersion (Tr S vanishes identically)")]
    MinimalImmersion,
    #[error("position constraint solve failed after {iterations} iterations (residual {residual:e})")]
    ConstraintSolveFailed { iterations: usize, residual: f64 },
    #[error("multiplier Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },
    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("initial data violates the constraints (max residual {residual:e})")]
    InvalidInitialData { residual: f64 },
    #[error("unsupported case: {0}")]
    Unsupported(&'static str),
}
