use std::fmt;

/// Runner-level error, carrying the exit code contract:
/// 2 usage, 3 I/O, 4 configuration/validation.
#[derive(Debug)]
pub enum CliError {
    /// Unknown scenario or bad command shape.
    Usage(String),
    /// Output directory or file cannot be written/read.
    Io(String),
    /// Config file problem: syntax, unknown key, or out-of-range value.
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Config(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qfcsim_core::Error> for CliError {
    fn from(e: qfcsim_core::Error) -> Self {
        match e {
            qfcsim_core::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
