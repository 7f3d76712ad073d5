use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("ill-founded tree: infinite path {0}")]
    IllFounded(String),

    #[error("well-foundedness undecided: {0}")]
    Undecided(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A tail could not be summarised from the sampled window.
    #[error("tail analysis failed: {0}")]
    Tail(String),

    #[error("rank mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
