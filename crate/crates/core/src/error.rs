use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside [-1,1]: coordinate {coord} = {value}")]
    Domain { coord: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index set has {size} elements, exceeding the oracle limit {limit}")]
    OracleScaleExceeded { size: usize, limit: usize },

    #[error("underdetermined: m = {m} < N = {n}")]
    Underdetermined { m: usize, n: usize },

    #[error("no weighted-sparse support fits budget k = {0}")]
    EmptySparsity(f64),

    #[error("emulation error {measured:.3e} exceeds delta = {delta:.3e}")]
    BuildRejected { measured: f64, delta: f64 },

    #[error("emulated matrix deviates by {measured:.3e} > sqrt(N)*delta = {bound:.3e}")]
    EmulationBound { measured: f64, bound: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("schema version {found} is not supported (expected {expected})")]
    Schema { expected: u32, found: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
