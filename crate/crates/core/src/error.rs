use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

/// Errors produced by the library. Each variant maps to a CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("design failed validation: {0}")]
    Invalid(ValidationReport),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no feasible neighbor after {0} attempts")]
    NoFeasibleNeighbor(usize),

    #[error("routers {0} and {1} are not connected")]
    Unreachable(usize, usize),

    #[error("{path}:{line}: {kind}")]
    Parse {
        path: PathBuf,
        line: u64,
        kind: ParseErrorKind,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Distinct failure reasons for the CSV loaders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("bad header, expected `{0}`")]
    Header(String),
    #[error("malformed row: {0}")]
    Malformed(String),
    #[error("index {index} out of range (n = {n})")]
    OutOfRange { index: usize, n: usize },
    #[error("duplicate pair ({0}, {1})")]
    DuplicatePair(usize, usize),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("self-traffic on core {0}")]
    SelfTraffic(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Parse { .. } | Error::InvalidParam(_) => 2,
            Error::Infeasible(_) | Error::NoFeasibleNeighbor(_) => 3,
            Error::Json(e) if !e.is_io() => 2,
            Error::Csv(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
