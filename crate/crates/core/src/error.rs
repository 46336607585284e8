//! Crate error type.

use thiserror::Error;

/// Errors produced by the pipeline.
///
/// [`Error::Io`] and [`Error::Format`] signal problems with files on disk;
/// the remaining variants signal violated preconditions on in-memory data
/// or configuration. Callers that need process exit codes can use
/// [`Error::is_io`] to separate the two classes.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file content, with a 1-based line number when known.
    #[error("{path}:{line}: {msg}")]
    Format {
        /// Path of the offending file.
        path: String,
        /// 1-based line number.
        line: usize,
        /// What went wrong.
        msg: String,
    },

    /// Violated precondition or invalid configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Mismatched vector or model dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension {
        /// Dimension required by the consumer.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },
}

impl Error {
    /// A [`Error::Format`] for the given file location.
    pub fn format(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// A precondition violation.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures reading or writing files (as opposed to invalid
    /// arguments or data).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format { .. })
    }
}
