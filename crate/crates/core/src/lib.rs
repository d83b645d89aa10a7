//! Turns diarized dialog transcripts into a three-level hierarchy of
//! summaries (LONG, MEDIUM, SHORT) aligned to transcript sentences and
//! audio time.
//!
//! The pipeline runs in two stages. Each speaker turn is split into
//! chunks of sentences linked by coreference chains ([`segmentation`]);
//! chunks are then summarized, embedded, clustered and merged level by
//! level ([`hierarchy`]). External models sit behind the traits in
//! [`providers`], each with an offline deterministic fake.

pub mod error;
pub mod model;
pub mod text;

pub use error::{
    BuildError, ConfigError, EvaluationError, ModelError, ProviderError, SegmentationError,
    VectorError,
};
pub mod hierarchy;
pub mod providers;
pub mod evaluation;
pub mod fixtures;
pub mod segmentation;
