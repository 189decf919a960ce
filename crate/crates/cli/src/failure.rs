use std::fmt;

use eneon::ErrorKind;

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(eneon::Error),
    FitNotConverged(String),
    Io(String),
    Verify(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Fit => 4,
                ErrorKind::Io => 1,
            },
            Failure::FitNotConverged(_) => 4,
            Failure::Io(_) | Failure::Verify(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::FitNotConverged(m) => write!(f, "fit did not converge: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Verify(m) => write!(f, "manifest verification failed: {m}"),
        }
    }
}

impl From<eneon::Error> for Failure {
    fn from(e: eneon::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
