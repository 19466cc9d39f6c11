use std::path::PathBuf;
use thiserror::Error;

/// Coarse error classes; the CLI maps each one to a stable exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Compute,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("deployment has no gNBs")]
    EmptyDeployment,
    #[error("coverage grids do not match")]
    GridMismatch,
    #[error("reference map covers no cells")]
    DivisionByZero,
    #[error("map has no covered cells")]
    NoCoveredCells,
    #[error("carrier {0} Hz is not present in the report")]
    UnknownCarrier(f64),
    #[error("cannot write output {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } | Error::Config(_) => ErrorClass::Config,
            Error::Parse { .. } | Error::Validation(_) => ErrorClass::Data,
            _ => ErrorClass::Compute,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
