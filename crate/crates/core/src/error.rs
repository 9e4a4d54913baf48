use alloc::string::String;

/// Input and capability errors shared by the foundational types.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capability not available: {0}")]
    Capability(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<(), Error> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
