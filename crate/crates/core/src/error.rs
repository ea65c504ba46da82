use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("span {index} ({start}..={end}) is out of range for a sentence of {len} tokens")]
    SpanOutOfRange {
        index: usize,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("span {index} ({start}..={end}) overlaps span {other}")]
    SpanOverlap {
        index: usize,
        other: usize,
        start: usize,
        end: usize,
    },

    #[error("span {index} ({start}..={end}) carries no sentiment")]
    MissingSentiment { index: usize, start: usize, end: usize },

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty sequence")]
    EmptySequence,

    #[error("gold index {index} out of range for a distribution of size {size}")]
    InvalidIndex { index: usize, size: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite loss on sentence `{sentence_id}`")]
    NonFiniteLoss { sentence_id: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
