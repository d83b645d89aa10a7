//! Artifact store, job queue, HTTP API and CLI around the skimsum
//! pipeline.
//!
//! Recordings are ingested from audio, plain transcripts, or transcripts
//! with inline coreference markup. A job runs the full pipeline and
//! publishes the transcript, hierarchy and evaluation reports as immutable
//! content-addressed objects. The HTTP API serves only those stored
//! artifacts.

pub mod audio;
pub mod error;
pub mod http;
pub mod input;
pub mod jobs;
pub mod service;
pub mod store;

pub use error::ServiceError;
pub use input::{Input, MarkedRecording, MarkedTurn};
pub use jobs::{Job, JobError, JobState, StageHook};
pub use service::{job_id, RecordingSummary, Service, ServiceOptions};
pub use store::Store;
