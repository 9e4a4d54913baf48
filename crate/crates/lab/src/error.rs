use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// 2 for configuration errors, 3 otherwise.
    pub fn code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Internal(_) | LabError::Io(_) => 3,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Internal(e.to_string())
    }
}

pub(crate) fn config<E: std::fmt::Display>(e: E) -> LabError {
    LabError::Config(e.to_string())
}

pub(crate) fn internal<E: std::fmt::Display>(e: E) -> LabError {
    LabError::Internal(e.to_string())
}
