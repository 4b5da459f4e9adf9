use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grade {grade} exceeds truncation {cap}")]
    GradeCap { grade: usize, cap: usize },

    #[error("{what} = {n} exceeds the cap of {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("operation requires a commutative algebra")]
    NotCommutative,

    #[error("operation requires a tracial state")]
    NotTracial,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function is not piecewise constant on the mode blocks")]
    NotPiecewiseConstant,

    #[error("supports overlap: the two symbols must have disjoint support")]
    OverlappingSupport,

    #[error("no rewrite rule for the pair ({left}, {right})")]
    NoRule { left: String, right: String },

    #[error("rewrite did not terminate within {0} steps")]
    StepLimit(u64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
