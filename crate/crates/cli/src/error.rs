use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("targets missed: {0}")]
    TargetsMissed(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::TargetsMissed(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io { .. } => 5,
        }
    }
}

impl From<msalab::Error> for CliError {
    fn from(e: msalab::Error) -> Self {
        use msalab::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain(_) | E::Precondition(_) | E::IncompatibleScales { .. } => {
                CliError::Validation(e.to_string())
            }
            E::ResolventBlowUp { .. } | E::SolverFailure { .. } | E::Internal(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io { path: "csv".into(), source: std::io::Error::other(e) }
    }
}
