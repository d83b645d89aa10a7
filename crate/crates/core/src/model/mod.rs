//! Domain types shared by every pipeline stage.

mod config;
mod entity;
mod range;
mod summary;
mod transcript;
mod vector;

pub use config::{Linkage, PipelineConfig};
pub use entity::{ChunkKind, CorefAnnotation, EntityCluster, MentionSpan, SemanticChunk};
pub use range::{EmptyRange, IndexRange};
pub use summary::{
    validate_hierarchy, DropLedgerEntry, Edge, Hierarchy, HighlightLevel, HighlightLink,
    HighlightTarget, Level, SummaryNode, TimelineEntry, HIERARCHY_SCHEMA_VERSION,
};
pub use transcript::{
    validate_transcript, Sentence, SpeakerTurn, Transcript, TranscriptArtifact,
    TranscriptBuilder, Violation, WordToken, TRANSCRIPT_SCHEMA_VERSION,
};
pub use vector::{cosine_similarity, DistanceMatrix, EmbeddingVector, HeuristicScore};
