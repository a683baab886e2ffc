use thiserror::Error;

/// Errors raised by spectrum construction, enumeration budgets and operator checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized (measured norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("invalid probability {value}: {reason}")]
    InvalidProbability { value: f64, reason: &'static str },

    #[error("invalid multiplicity {0}: must be a positive finite integer")]
    InvalidMultiplicity(f64),

    #[error("budget `{budget}` exceeded: need {required}, limit {limit}")]
    BudgetExceeded {
        budget: &'static str,
        required: f64,
        limit: u64,
    },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("majorization fails at prefix index {index} (lhs {lhs}, rhs {rhs})")]
    NotMajorized { index: usize, lhs: f64, rhs: f64 },

    #[error("matrix is not Hermitian (deviation {0})")]
    NotHermitian(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("operator is not a contraction (eigenvalue {0} outside [0, 1])")]
    NotContraction(f64),

    #[error("invalid trace-preserving map: {0}")]
    InvalidMap(String),

    #[error("invalid sequence model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
