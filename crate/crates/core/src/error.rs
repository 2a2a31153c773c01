use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and scoring library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its domain constraint. `field` names the offending
    /// parameter using the config-file key path where one exists.
    #[error("{field}: {message}")]
    InvalidParameter { field: String, message: String },

    /// One or more config fields failed validation.
    #[error("{}", format_issues(.0))]
    InvalidConfig(Vec<ConfigIssue>),

    #[error("slot {slot} is outside the attack schedule [1, {horizon}]")]
    SlotOutOfSchedule { slot: usize, horizon: usize },

    #[error("unknown sweep axis `{0}` (expected one of p_a, p_detect, w2, lambda, gamma, rho, omega)")]
    UnknownAxis(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("row {row} failed validation: {message}")]
    InvalidRecord { row: usize, message: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A single field-level validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (config or parameters) rather
    /// than by the runtime environment.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidConfig(_)
                | Error::Parse(_)
                | Error::UnknownAxis(_)
                | Error::UnknownFigure(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
