use std::path::PathBuf;

use strop_core::baselines::BaselineError;
use strop_core::problems::ProblemError;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("problem setup failed: {0}")]
    Problem(#[from] ProblemError),
    #[error("numerical failure: {0}")]
    NonFinite(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("failed checks: {0}")]
    ChecksFailed(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) | HarnessError::Problem(_) => 2,
            HarnessError::NonFinite(_) => 3,
            HarnessError::ChecksFailed(_) => 4,
            HarnessError::Io { .. } | HarnessError::Format { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        HarnessError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        HarnessError::Config(ConfigError::Invalid {
            key: key.to_owned(),
            reason: reason.into(),
        })
    }
}

impl From<BaselineError> for HarnessError {
    fn from(err: BaselineError) -> Self {
        match err {
            BaselineError::Config(e) => {
                HarnessError::invalid(&format!("baseline.{}", e.key), e.reason)
            }
            BaselineError::Retraction(e) => {
                HarnessError::NonFinite(format!("retraction failed: {e}"))
            }
        }
    }
}
