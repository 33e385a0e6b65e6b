use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis {hypothesis} violated at u = {witness}")]
    HypothesisViolated { hypothesis: &'static str, witness: f64 },

    #[error("potential vanishes inside the well interval near u = {at}")]
    QuadratureSingularity { at: f64 },

    #[error("degenerate well: G''(M) = {second_derivative} is not positive")]
    DegenerateWell { second_derivative: f64 },

    #[error("profile inversion failed at tau = {tau}")]
    InversionFailure { tau: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point ({y}, {z}) outside the wedge |z| <= y")]
    DomainViolation { y: f64, z: f64 },

    #[error("grid too coarse: {interior} interior nodes (need at least 100)")]
    GridTooCoarse { interior: usize },

    #[error("energy increased from {before} to {after} at iteration {iteration}")]
    NonDecreaseFailure { iteration: usize, before: f64, after: f64 },

    #[error("perturbation support reaches y = {y_support}, beyond the admissible {y_limit}")]
    UnsupportedDomain { y_support: f64, y_limit: f64 },

    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual})")]
    EigenConvergenceFailure { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
