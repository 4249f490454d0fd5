//! One error type for the whole crate. The CLI buckets these into exit codes:
//! parse errors (4), solver failures (3), and domain/validation errors (2).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mixed exact and float scalars in one operation")]
    ModeMismatch,

    #[error("division by a zero series")]
    DivisionByZero,

    #[error("branch {branch} does not match the leading coefficient {leading}")]
    BranchMismatch { branch: String, leading: String },

    #[error("not representable in exact mode: {0}")]
    NotRepresentable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate y{index} has valuation {valuation}, expected a unit of valuation 0")]
    NonUnitCoordinate { index: usize, valuation: String },

    #[error("class {class} has no intersection number with divisor {divisor}")]
    IncompleteBulkData { class: String, divisor: String },

    #[error("derivative direction {index} is degenerate: {reason}")]
    DegenerateDirection { index: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("lifting failed: {0}")]
    NotLiftable(String),

    #[error("coefficient matching failed: {0}")]
    MatchFailure(String),

    #[error("malformed rational {0:?}")]
    MalformedRational(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("model error: {0}")]
    Model(String),
}

impl Error {
    /// Attaches a source line number, turning any error into a parse error.
    pub fn at_line(self, line: usize) -> Error {
        match self {
            Error::Parse { .. } => self,
            other => Error::Parse { line, msg: other.to_string() },
        }
    }
}
