use std::fmt;
use std::path::Path;

use bcqse_core::Error;

pub const EXIT_CONTRACT: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PRECISION: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: String, source: std::io::Error },
    Contract(String),
    Input(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::PrecisionUnreachable { .. } => EXIT_PRECISION,
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::InvalidPattern(_)
                | Error::EmptyBatch
                | Error::NotHermitian { .. }
                | Error::QubitOutOfRange { .. } => EXIT_INPUT,
                Error::DimensionMismatch(_) | Error::QubitCapExceeded { .. } | Error::UnboundedOptimum => EXIT_CONTRACT,
            },
            CliError::Io { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Contract(m) => write!(f, "contract violation: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
