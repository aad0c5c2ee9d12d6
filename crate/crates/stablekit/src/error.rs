use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("degree in variable {var} exceeds the supplied multidegree")]
    DegreeExceedsMultidegree { var: usize },
    #[error("variable count mismatch: expected {expected}, found {found}")]
    VariableMismatch { expected: usize, found: usize },
    #[error("non-exact coefficients: {0}")]
    NonExact(String),
    #[error("point is not a zero of the polynomial")]
    NotAZero,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("truncation order {0} too short to decide")]
    TruncationTooShort(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
