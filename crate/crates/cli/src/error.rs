use std::fmt;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Output differs from a fixture beyond tolerance.
    Mismatch(String),
    /// Unreadable or inconsistent configuration or input files.
    Config(String),
    /// A computation failed or lost accuracy.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Mismatch(m) => write!(f, "fixture mismatch: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<radiant::Error> for CliError {
    fn from(e: radiant::Error) -> Self {
        use radiant::Error::*;
        match e {
            InvalidInput(_)
            | TooManyAtoms { .. }
            | CoincidentAtoms { .. }
            | Parse { .. }
            | ResourceGuard { .. } => CliError::Config(e.to_string()),
            Io(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
