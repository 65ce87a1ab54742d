use std::fmt;

/// Failure of a job. The exit code separates bad input (2) from numerical failures (1).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    /// A numerical routine failed; `module` names where.
    Job { module: &'static str, source: rbsol::Error },
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Job { source, .. } => match source {
                rbsol::Error::InvalidParams(_) | rbsol::Error::ExcludedParameter(_) | rbsol::Error::InvalidGrid(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn io(what: impl fmt::Display, e: std::io::Error) -> Self {
        CliError::Io(format!("{what}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Job { module, source } => write!(f, "[{module}] {source}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Tags a core error with the module that raised it.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for rbsol::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Job { module, source })
    }
}
