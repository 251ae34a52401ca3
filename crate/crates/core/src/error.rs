use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid coordinate system: {0}")]
    InvalidCoordinates(String),

    #[error("evaluation domain error: {0}")]
    EvaluationDomain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("diffusor is not standard: {0}")]
    NotStandard(String),

    #[error("vector field is not projectable: {0}")]
    NotProjectable(String),

    #[error("diffeomorphism has no inverse maps")]
    MissingInverse,

    #[error("inverse maps do not invert the forward maps: {0}")]
    InvalidInverse(String),

    #[error("ansatz basis not closed: residual term `{term}` is outside the collector span")]
    BasisNotClosed { term: String },

    #[error("invalid ansatz basis: {0}")]
    InvalidBasis(String),

    #[error("coefficients depend on time: {0}")]
    NonAutonomous(String),

    #[error("matrix C is not antisymmetric: entry ({row}, {col}) gives C + C^T = {value}")]
    NotAntisymmetric {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("diffusion matrix is not positive semidefinite (most negative eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("numeric blow-up: state norm {norm:e} exceeded 1e12")]
    NumericBlowup { norm: f64 },

    #[error("time change is not strictly increasing on the grid (index {index})")]
    NonMonotoneTimeChange { index: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
