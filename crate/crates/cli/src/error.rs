use std::process::ExitCode;

/// Exit status 2 for bad configuration, 3 for a broken internal invariant.
/// A failed check is not an error: it is reported with status 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(3),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<ztrace::Error> for CliError {
    fn from(e: ztrace::Error) -> Self {
        match e {
            ztrace::Error::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
