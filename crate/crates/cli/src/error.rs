use serde::Serialize;
use thiserror::Error;

use cmc_orbit::assembly::AssemblyError;
use cmc_orbit::shooting::{ShootError, ShotRecord, SolveError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{message}")]
    NonConvergence { message: String, history: Vec<ShotRecord> },
    #[error("{0}")]
    Assembly(String),
    #[error("{0}")]
    Numerics(String),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Serialize)]
struct ErrorJson<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    history: Option<&'a [ShotRecord]>,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::InvalidConfig(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::InvalidConfig(_) => "invalid-config",
            CliError::NonConvergence { .. } => "non-convergence",
            CliError::Assembly(_) => "assembly",
            CliError::Numerics(_) => "numerics",
            CliError::Failed(_) => "verification-failed",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::NonConvergence { .. } | CliError::Assembly(_) => 3,
            CliError::Failed(_) => 4,
            CliError::Numerics(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let history = match self {
            CliError::NonConvergence { history, .. } => Some(history.as_slice()),
            _ => None,
        };
        serde_json::to_string(&ErrorJson {
            kind: self.kind(),
            message: self.to_string(),
            history,
        })
        .expect("error report serializes")
    }
}

impl From<ShootError> for CliError {
    fn from(e: ShootError) -> Self {
        match e {
            ShootError::InvalidR0 { .. } | ShootError::InvalidConfig(_) => CliError::InvalidConfig(e.to_string()),
            _ => CliError::Numerics(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Shoot(s) => s.into(),
            SolveError::FamilyMismatch { .. } => CliError::InvalidConfig(e.to_string()),
            _ => CliError::NonConvergence {
                message: e.to_string(),
                history: e.history().to_vec(),
            },
        }
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        CliError::Assembly(e.to_string())
    }
}
