use thiserror::Error;

/// Errors raised by braceforge operations.
///
/// Property violations (a failed axiom, a non-pre-Lie triple) are *not*
/// errors; checkers return them as values. Errors are reserved for bad
/// input, unmet preconditions and exhausted resource caps.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero in F_{p}")]
    DivisionByZero { p: u32 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    Resource { what: String, needed: u128, cap: u128 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::Resource {
            what: what.into(),
            needed,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
