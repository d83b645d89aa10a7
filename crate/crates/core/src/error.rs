use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid transcript: {}", render(.0))]
    InvalidTranscript(Vec<Violation>),
    #[error("invalid entity {id}: {reason}")]
    InvalidEntity { id: usize, reason: String },
    #[error("invalid hierarchy: {}", .0.join("; "))]
    InvalidHierarchy(Vec<String>),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn render(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("empty vector")]
    Empty,
    #[error("vector has non-finite entries")]
    NonFinite,
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("distance matrix law violated: {0}")]
    MatrixLaw(String),
}

/// Typed failure of an external model capability.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("provider {provider} unavailable: {message}")]
    Unavailable { provider: String, message: String },
    #[error("malformed response from {provider}: {detail}")]
    MalformedResponse {
        provider: String,
        detail: String,
        violations: Vec<Violation>,
    },
    #[error("provider {provider} returned empty output")]
    EmptyOutput { provider: String },
    #[error("invalid provider input: {0}")]
    InvalidInput(String),
}

impl ProviderError {
    pub fn code(&self) -> &'static str {
        match self {
            ProviderError::Unavailable { .. } => "PROVIDER_UNAVAILABLE",
            ProviderError::MalformedResponse { .. } => "MALFORMED_RESPONSE",
            ProviderError::EmptyOutput { .. } => "EMPTY_OUTPUT",
            ProviderError::InvalidInput(_) => "INVALID_INPUT",
        }
    }

    pub(crate) fn malformed(provider: &str, detail: impl Into<String>) -> Self {
        ProviderError::MalformedResponse {
            provider: provider.to_string(),
            detail: detail.into(),
            violations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentationError {
    #[error("coreference failed on turn {turn}: {source}")]
    Provider {
        turn: usize,
        #[source]
        source: ProviderError,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("segmentation produced no chunks")]
    NoChunks,
    #[error("every merged cluster fell at or below the stem cutoff")]
    AllStemmed,
    #[error("no input nodes")]
    EmptyLevel,
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("invalid cluster assignment: {0}")]
    Assignment(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("reports are for different recordings: {0} vs {1}")]
    RecordingMismatch(String, String),
    #[error("need at least two reports to compare")]
    TooFewReports,
    #[error("strategy produced no segments")]
    NoSegments,
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Vector(#[from] VectorError),
}
