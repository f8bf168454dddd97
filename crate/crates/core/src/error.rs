use std::io;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown paper id `{0}`")]
    UnknownPaper(String),

    #[error("node index {0} out of range")]
    UnknownIndex(u32),

    #[error("time-slice requires years")]
    MissingYears,

    #[error("graph is empty")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("non-finite loss at step {step} (learning rate {learning_rate})")]
    NonFinite { step: u64, learning_rate: f64 },

    #[error("method `{method}` requires {missing}")]
    MethodInput { method: String, missing: String },

    #[error("missing sliced models for years: {0:?}")]
    MissingSlices(Vec<i32>),

    #[error("time leakage: {0}")]
    Leakage(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
