use std::fmt;
use std::path::Path;

use chromascreen::adapt::AdaptError;
use chromascreen::engine::EngineError;

pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const MISMATCH: u8 = 4;
pub const ENVIRONMENT: u8 = 5;

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: USAGE, message: message.into() }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError { code: IO, message: format!("{}: {e}", display(path)) }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        CliError { code: MISMATCH, message: message.into() }
    }

    pub fn environment(message: impl Into<String>) -> Self {
        CliError { code: ENVIRONMENT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::MissingResponse(_)
            | EngineError::DuplicateResponse(_)
            | EngineError::UnknownPlate(_)
            | EngineError::Sequencing { .. } => CliError::mismatch(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<AdaptError> for CliError {
    fn from(e: AdaptError) -> Self {
        CliError::usage(e.to_string())
    }
}

pub fn display(path: &Path) -> String {
    if path == Path::new("-") {
        "<stdin>".into()
    } else {
        path.display().to_string()
    }
}
