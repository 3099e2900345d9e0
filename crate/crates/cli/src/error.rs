use std::fmt;

/// Failure classes, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    Validation(String),
    /// A spectral computation failed; exit code 3. Carries the core error.
    Numerical(lindspec_core::Error),
    /// Filesystem or serialization trouble; exit code 1.
    Io(String),
    /// Some sweep cells failed; exit code 1.
    PartialFailure { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::PartialFailure { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::PartialFailure { failed, total } => write!(f, "{failed} of {total} sweep cells failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
