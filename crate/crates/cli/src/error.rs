use std::fmt;

/// Failures mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or output path: exit 2.
    Usage(String),
    /// The computation itself failed: exit 1.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<magdde::Error> for CliError {
    fn from(e: magdde::Error) -> Self {
        match e {
            magdde::Error::InvalidArgument(_) | magdde::Error::OutOfRange { .. } => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}
