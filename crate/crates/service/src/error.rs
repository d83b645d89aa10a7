use serde::Serialize;
use thiserror::Error;

use skimsum::ConfigError;

use crate::jobs::{JobError, JobState};
use crate::store::StoreError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error("unreadable input: {0}")]
    UnreadableInput(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("recording {recording_id} is not ready")]
    NotReady {
        recording_id: String,
        state: Option<JobState>,
        error: Option<JobError>,
    },
    #[error("range out of bounds: {0}")]
    RangeOutOfBounds(String),
    #[error("no job {0}")]
    JobNotFound(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidConfig(_) => "INVALID_CONFIG",
            ServiceError::UnreadableInput(_) => "UNREADABLE_INPUT",
            ServiceError::NotFound(_) => "NOT_FOUND",
            ServiceError::NotReady { .. } => "NOT_READY",
            ServiceError::RangeOutOfBounds(_) => "RANGE_OUT_OF_BOUNDS",
            ServiceError::JobNotFound(_) => "JOB_NOT_FOUND",
            ServiceError::Store(_) => "STORE_ERROR",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (state, error) = match self {
            ServiceError::NotReady { state, error, .. } => (*state, error.clone()),
            _ => (None, None),
        };
        ErrorBody { code: self.code(), message: self.to_string(), state, error }
    }
}

/// JSON shape of every API error.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<JobState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<JobError>,
}
