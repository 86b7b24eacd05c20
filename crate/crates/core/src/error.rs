use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian: asymmetry {residual:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix function is undefined at eigenvalue {eigenvalue:e}")]
    Domain { eigenvalue: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below clip tolerance")]
    NotPsd { eigenvalue: f64 },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("dual slack is not strictly positive definite (lambda_min = {lambda_min:e}); ground-state condensation")]
    DualInfeasible { lambda_min: f64 },

    #[error("dual has empty interior: best lambda_min {best_lambda_min:e} after {iterations} iterations")]
    EmptyInterior {
        best_lambda_min: f64,
        iterations: usize,
    },

    #[error("dual objective is unbounded above")]
    DualUnbounded,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimator budget infeasible: truncation depth {depth} exceeds cap {cap}")]
    BudgetInfeasible { depth: f64, cap: usize },

    #[error("step underflow: no step along the ascent ray keeps lambda_min >= {floor:e}")]
    StepUnderflow { floor: f64 },

    #[error("hessian is numerically singular")]
    SingularHessian,

    #[error("instance: {0}")]
    Instance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
