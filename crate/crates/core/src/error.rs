use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Computation,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("{} row error(s) in {}:\n{}", .errors.len(), .source_name, format_row_errors(.errors))]
    Rows {
        source_name: String,
        errors: Vec<RowError>,
    },

    #[error("complete separation in cell {cell}: all {count} outcomes are {outcome}")]
    Separation {
        cell: String,
        count: usize,
        outcome: u8,
    },

    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("logit fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("level {0} is not present in the fitted data")]
    UnknownLevel(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation { .. }
            | Error::Empty(_)
            | Error::Rows { .. }
            | Error::Parse { .. } => ErrorKind::Validation,
            Error::Separation { .. }
            | Error::RankDeficient { .. }
            | Error::NotConverged { .. }
            | Error::UnknownLevel(_)
            | Error::Degenerate(_) => ErrorKind::Computation,
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}

/// A diagnostic attached to one line of an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

fn format_row_errors(errors: &[RowError]) -> String {
    errors
        .iter()
        .map(|e| format!("  line {}: {}", e.line, e.message))
        .collect::<Vec<_>>()
        .join("\n")
}
