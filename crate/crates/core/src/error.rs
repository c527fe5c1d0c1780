use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("Kraus operators are not trace preserving (max deviation {0:e})")]
    InvalidChannel(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("inconsistent isometry specification: {0}")]
    InconsistentIsometry(String),

    #[error("outcome is impossible (probability {0:e})")]
    ImpossibleOutcome(f64),

    #[error("basis is not orthonormal and complete: {0}")]
    IncompleteBasis(String),

    #[error("state is not an element of the classical basis: {0}")]
    NotInBasis(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("steady state did not converge after {0} iterations; supply an explicit prior")]
    NoConvergence(usize),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;
