use std::path::PathBuf;

use distill_core::DistillError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("invalid grid '{spec}': {reason}")]
    InvalidGrid { spec: String, reason: String },
    #[error("invalid value for '{key}': {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("cannot read config {path}: {source}")]
    Config {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Numerical(#[from] DistillError),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }

    /// Stable identifier printed on the error line.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::UnknownExperiment(_) => "E_UNKNOWN_EXPERIMENT",
            CliError::InvalidGrid { .. } => "E_INVALID_GRID",
            CliError::InvalidValue { .. } => "E_INVALID_VALUE",
            CliError::UnknownKey(_) => "E_UNKNOWN_KEY",
            CliError::Config { .. } => "E_CONFIG_UNREADABLE",
            CliError::Output { .. } => "E_OUTPUT_UNWRITABLE",
            CliError::Numerical(_) => "E_NUMERICAL",
            CliError::ChecksFailed { .. } => "E_VALIDATION",
        }
    }

    /// `distill-error code=... exit=... message="..."`
    pub fn machine_line(&self) -> String {
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
        format!("distill-error code={} exit={} message=\"{}\"", self.code(), self.exit_code(), msg)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
