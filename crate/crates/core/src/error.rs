use std::path::PathBuf;

/// Errors raised anywhere in the compress / optimize / decompress workflow.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}: missing required column or property `{column}`")]
    Schema { file: String, column: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("no solution satisfies the filter: {0}")]
    EmptyResult(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front-ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    EmptyResult,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Schema { .. }
            | Error::Validation(_)
            | Error::Argument(_)
            | Error::Parse { .. }
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Validation,
            Error::Numerical(_) | Error::Model(_) => ErrorClass::Numerical,
            Error::EmptyResult(_) => ErrorClass::EmptyResult,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
