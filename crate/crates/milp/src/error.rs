use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("column {col} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { col: String, lower: f64, upper: f64 },
    #[error("coefficient index out of range (row {row}, col {col})")]
    IndexOutOfRange { row: usize, col: usize },
    #[error("problem has no columns")]
    Empty,
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("MPS parse error at line {line}: {msg}")]
    MpsParse { line: usize, msg: String },
    #[error("cannot write MPS: {0}")]
    MpsWrite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
