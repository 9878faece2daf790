//! Run failures and the exit-code contract.

use std::path::PathBuf;

use serde::Serialize;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// A configuration problem located by its key path (`""` for the document root).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{message}", if path.is_empty() { String::new() } else { format!("{path}: ") })]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failed: {0}")]
    Solver(String),
    /// The analysis could not be carried out on the computed field.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// What is printed to stderr when a run ends in an error.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Solver(_) => "solver",
            LabError::Verification(_) => "verification",
            LabError::Io { .. } => "io",
        }
    }

    /// Output and input file problems share the configuration code: both
    /// mean the run could not be set up as described.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io { .. } => EXIT_CONFIG,
            LabError::Solver(_) => EXIT_SOLVER,
            LabError::Verification(_) => EXIT_CHECK_FAILED,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let path = match self {
            LabError::Config(c) => Some(c.path.clone()),
            LabError::Io { path, .. } => Some(path.display().to_string()),
            _ => None,
        };
        ErrorRecord { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string(), path }
    }
}

impl From<stlab_core::Error> for LabError {
    fn from(e: stlab_core::Error) -> Self {
        use stlab_core::Error as E;
        match e {
            E::InvalidSolverConfig(_) => ConfigError::new("solver", e.to_string()).into(),
            E::GridTooSmall { .. } | E::BadSpacing { .. } => ConfigError::new("grid", e.to_string()).into(),
            E::NotPositiveDefinite { .. } => ConfigError::new("metric", e.to_string()).into(),
            E::SingularOperator => ConfigError::new("boundary", e.to_string()).into(),
            E::Precondition { .. } => ConfigError::new("verification", e.to_string()).into(),
            E::FieldLength { .. } => ConfigError::new("", e.to_string()).into(),
            E::LinearSolve(_) | E::PicardStalled { .. } => LabError::Solver(e.to_string()),
            E::LevelOutOfRange { .. } | E::MissingSurface { .. } => LabError::Verification(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_contract() {
        let c: LabError = ConfigError::new("metric", "missing field `family`").into();
        assert_eq!(c.exit_code(), EXIT_CONFIG);
        assert_eq!(c.record().path.as_deref(), Some("metric"));
        assert_eq!(c.to_string(), "invalid configuration: metric: missing field `family`");
        let s: LabError = stlab_core::Error::SingularOperator.into();
        assert_eq!(s.exit_code(), EXIT_CONFIG);
        let s = LabError::Solver("stalled".into());
        assert_eq!(s.exit_code(), EXIT_SOLVER);
        assert_eq!(s.record().kind, "solver");
    }
}
