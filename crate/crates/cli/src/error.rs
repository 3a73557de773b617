//! One error type for everything the application layer can fail at.

use std::fmt;

use umbrella_core::path::PathError;
use umbrella_core::DriverError;
use umbrella_mock::MockError;

/// Why an application-level operation failed.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// A driver call failed.
    Driver(DriverError),
    /// Path computation failed.
    Path(PathError),
    /// Bad plan, flag, or configuration value.
    Invalid(String),
    /// The simulated controller refused an operation, or a measurement
    /// violated an invariant the harness depends on.
    Simulation(String),
    /// Reading or writing a file failed.
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Driver(e) => write!(f, "driver error: {e}"),
            CliError::Path(e) => write!(f, "path error: {e}"),
            CliError::Invalid(msg) => write!(f, "invalid input: {msg}"),
            CliError::Simulation(msg) => write!(f, "simulation error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DriverError> for CliError {
    fn from(e: DriverError) -> Self {
        CliError::Driver(e)
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        CliError::Path(e)
    }
}

impl From<MockError> for CliError {
    fn from(e: MockError) -> Self {
        CliError::Simulation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
