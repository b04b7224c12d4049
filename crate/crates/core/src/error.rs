//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building instances, reading files, or
/// running learners. Variants are coarse on purpose: callers mostly care
/// about *which contract* was broken, not about recovering.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural problem in user-supplied configuration: mismatched
    /// dimensions, probability rows that do not normalize, missing context
    /// rows, fold counts that cannot be satisfied, and the like.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside its documented domain (delta not in (0,1),
    /// nonpositive gamma where positivity is required, empty policy class...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Logged data that violates its own invariants, e.g. a record with zero
    /// propensity or an action index outside the instance's action set.
    #[error("data integrity error: {0}")]
    Data(String),

    /// A malformed input file. `line` is 1-based and refers to the source
    /// file, so the message can be pasted into an editor jump.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
