use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("stage `{stage}` needs the output of `{needs}`: run `accessrank {command}` first")]
    MissingDependency {
        stage: &'static str,
        needs: &'static str,
        command: &'static str,
    },
    #[error("stage `{stage}` needs the output of `{needs}`, but {detail}: rerun `accessrank {command}`")]
    StaleDependency {
        stage: &'static str,
        needs: &'static str,
        command: &'static str,
        detail: String,
    },
    #[error(
        "stage `{stage}` would mix configurations: `{upstream}` was produced with different settings; \
         rerun `accessrank {command}` or pass --force"
    )]
    ConfigMismatch {
        stage: &'static str,
        upstream: &'static str,
        command: &'static str,
    },
    #[error("work directory is locked by another pipeline ({}); remove it if no run is active", .0.display())]
    Locked(PathBuf),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::ConfigMismatch { .. } => 2,
            CliError::MissingDependency { .. } | CliError::StaleDependency { .. } => 3,
            CliError::Locked(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}
