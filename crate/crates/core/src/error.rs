use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numeric,
    Fit,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations: {detail}")]
    NotConverged {
        what: String,
        iterations: usize,
        detail: String,
    },

    #[error("{model} fit did not converge: {detail}")]
    FitFailed { model: String, detail: String },

    #[error("resonant transition {0}->{1}: detuning from the resonator is zero")]
    Resonance(usize, usize),

    #[error("pole in dispersive formula: {0}")]
    Pole(String),

    #[error("no crossing with the resonator in the requested range: {0}")]
    NoCrossing(String),

    #[error("density matrix unstable at t = {time_ns} ns: {detail}")]
    Unstable { time_ns: f64, detail: String },

    #[error("decay fit needs a decaying curve: {0}")]
    NotDecaying(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation { .. }
            | Error::Domain(_)
            | Error::Parse { .. }
            | Error::Schema(_)
            | Error::NotDecaying(_) => ErrorKind::Input,
            Error::NotConverged { .. }
            | Error::Resonance(..)
            | Error::Pole(_)
            | Error::NoCrossing(_)
            | Error::Unstable { .. } => ErrorKind::Numeric,
            Error::FitFailed { .. } => ErrorKind::Fit,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn ensure_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    ensure_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(field: &str, value: f64) -> Result<()> {
    ensure_finite(field, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be >= 0, got {value}")))
    }
}
