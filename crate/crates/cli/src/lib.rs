//! Command-line front end and HTTP bridge.

pub mod bridge;
pub mod commands;
pub mod repl;

use std::fmt;

/// Exit status classes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or scenario content; exit 2.
    Input(String),
    /// Anything else; exit 1.
    Internal(String),
    /// The reader went away (e.g. `| head`); exit 0 quietly.
    Closed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
            CliError::Closed => 0,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Closed => f.write_str("output closed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<proactive_core::ScenarioError> for CliError {
    fn from(e: proactive_core::ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<proactive_core::SimError> for CliError {
    fn from(e: proactive_core::SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Internal(e.to_string())
    }
}
