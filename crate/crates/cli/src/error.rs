use std::fmt;

use fdeconv::Error;

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters (exit 1).
    Usage(String),
    /// Bad input data or a numerical failure (exit 2).
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::LevelTooCoarse { .. } | Error::LevelTooFine { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}
