use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input: exit 2.
    Input(String),
    /// The computation itself failed: exit 3.
    Compute(String),
    /// A `--check` assertion did not hold: exit 4.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Check(_) => 4,
        }
    }

    pub fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn compute(e: impl fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<effham_core::Error> for CliError {
    fn from(e: effham_core::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
