use fewbody::amplitudes::AmplitudeError;
use fewbody::greenfn::GreenError;
use fewbody::nbody::NBodyError;
use fewbody::thermo::ThermoError;
use fewbody::threebody::ThreeBodyError;
use fewbody::twobody::TwoBodyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Unit(String),
    #[error("{0}")]
    Io(String),
    /// A library error, with what the command was doing when it happened.
    #[error("{context}: {message}")]
    Compute { context: String, message: String },
}

impl CliError {
    /// Short machine-readable category, printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Unit(_) => "unit",
            CliError::Io(_) => "io",
            CliError::Compute { .. } => "compute",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unit(_) => 3,
            CliError::Io(_) => 4,
            CliError::Compute { .. } => 5,
        }
    }
}

/// Attaches context to a library error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

macro_rules! library_error {
    ($($t:ty),*) => {$(
        impl<T> Context<T> for Result<T, $t> {
            fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
                self.map_err(|e| CliError::Compute { context: what(), message: e.to_string() })
            }
        }
    )*};
}

library_error!(AmplitudeError, GreenError, NBodyError, ThermoError, ThreeBodyError, TwoBodyError);

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
