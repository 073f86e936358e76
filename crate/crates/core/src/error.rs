use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("data matrix must have at least {min} rows and 2 columns, got {n}x{d}")]
    TooSmall { n: usize, d: usize, min: usize },
    #[error("data matrix has {len} values, expected {n}x{d}")]
    Shape { n: usize, d: usize, len: usize },
    #[error("dimension {d} exceeds the supported maximum {max}")]
    TooManyFeatures { d: usize, max: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("tied values in columns {columns:?} (1-based) under the no-ties policy")]
    Ties { columns: Vec<usize> },
    #[error("feature index {index} out of range (max {max})")]
    FeatureOutOfRange { index: usize, max: usize },
    #[error("feature sets must be non-empty")]
    EmptyFeatureSet,
    #[error("k = {k} must satisfy 1 <= k <= n - 1 = {}", n.saturating_sub(1))]
    InvalidK { k: usize, n: usize },
    #[error("finite-difference step {step} must be below 1 (k = {k})")]
    StepTooLarge { k: usize, step: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("structure generation gave up after {attempts} rejections while placing subset {placed} of {target}")]
    InfeasibleStructure { placed: usize, target: usize, attempts: usize },
}
