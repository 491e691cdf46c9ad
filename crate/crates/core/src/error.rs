use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("empty matrix or vector: {0}")]
    Empty(String),

    #[error("sparsity {sparsity} out of range 1..={max}")]
    SparsityOutOfRange { sparsity: usize, max: usize },

    #[error("atom {column} is not unit-norm (norm {norm})")]
    NotNormalized { column: usize, norm: f64 },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix is not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "exhaustive search over C({atoms}, {sparsity}) subsets exceeds the cap of {cap}; reduce the sparsity or the number of atoms"
    )]
    SubsetCapExceeded {
        atoms: usize,
        sparsity: usize,
        cap: u64,
    },

    #[error("inconsistent Gram system: squared residual {value:e} is negative")]
    InconsistentGram { value: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("class {class} has no atoms")]
    EmptyClass { class: usize },

    #[error("atom {column} has zero norm")]
    ZeroNormAtom { column: usize },

    #[error("class '{class}' has {available} samples, need more than {required}")]
    ClassTooSmall {
        class: String,
        available: usize,
        required: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
