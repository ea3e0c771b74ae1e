use std::fmt;

use bellsim_core::Error as CoreError;

/// Exit status classes of the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: unknown labels, malformed grids, unwritable paths. Exit 1.
    Validation,
    /// A simulator invariant failed. Exit 2.
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Internal => 2,
        }
    }

    /// Single-line JSON for the diagnostic stream.
    pub fn to_line(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Validation => "validation",
            ErrorKind::Internal => "internal",
        };
        serde_json::json!({ "error": kind, "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Invariant(_) => Self::internal(err.to_string()),
            _ => Self::validation(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
