use thiserror::Error;

/// Errors raised by the exact kernels, the sequence constructors and the
/// operator models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not in GL(d,Z): determinant {det}")]
    NotInGL { det: String },

    #[error("S^{m} - I is not nilpotent")]
    NotUnipotent { m: u64 },

    #[error("product of generators {left} and {right} is not declared")]
    NonClosedProduct { left: String, right: String },

    #[error("sieve limit {requested} exceeds cap {cap}")]
    LimitTooLarge { requested: u64, cap: u64 },

    #[error("sequence reports no finite bound")]
    UnboundedSequence,

    #[error("polynomial is constant; use poly_exp directly")]
    DegreeZero,

    #[error("expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("polynomial form disagrees with the orbit at n = {0}")]
    MismatchAt(i64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("S'ΘS - Θ has a non-integer entry at ({row}, {col})")]
    NotCompatible { row: usize, col: usize },

    #[error("fitted phase polynomial of degree <= {bound} fails verification at residue {residue}, t = {t}")]
    DegreeBoundExceeded { bound: usize, residue: u64, t: i64 },

    #[error("state vector has norm {norm}, expected 1")]
    NotUnitVector { norm: f64 },

    #[error("θ entry is not rational")]
    NotRational,

    #[error("operator {index} has nonzero shift; not diagonal")]
    NotDiagonal { index: usize },

    #[error("exponent overflow while evaluating at n = {0}")]
    ExponentOverflow(i64),

    #[error("atom {id} carries inconsistent eigenphases")]
    InconsistentAtom { id: u64 },

    #[error("matrix is not square")]
    NotSquare,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
