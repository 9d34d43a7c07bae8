use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A trace file could not be parsed. `line` is 1-based (JSON: array element
    /// position, also 1-based) when the problem can be pinned to a row.
    #[error("{}", fmt_parse(.line, .message))]
    TraceParse { line: Option<usize>, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("event index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown resource `{0}`")]
    UnknownResource(String),

    #[error("event {0} is not a member of the slice")]
    NotAMember(usize),
}

fn fmt_parse(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("parse error at line {l}: {message}"),
        None => format!("parse error: {message}"),
    }
}

impl Error {
    pub(crate) fn parse_at(line: usize, message: impl Into<String>) -> Self {
        Error::TraceParse { line: Some(line), message: message.into() }
    }

    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::TraceParse { line: None, message: message.into() }
    }

    pub(crate) fn model(message: impl Into<String>) -> Self {
        Error::Model(message.into())
    }
}
