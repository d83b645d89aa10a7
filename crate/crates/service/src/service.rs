use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use skimsum::evaluation::EvaluationReport;
use skimsum::model::{PipelineConfig, Transcript};
use skimsum::providers::Providers;

use crate::audio::{self, AudioError, AudioSlice};
use crate::error::ServiceError;
use crate::input::Input;
use crate::jobs::{Job, JobManager, StageHook};
use crate::store::{sha256_hex, InputRef, RecordingEntry, Store};

#[derive(Clone, Default)]
pub struct ServiceOptions {
    /// Worker threads; zero means one.
    pub workers: usize,
    pub stage_hook: Option<StageHook>,
}

/// Recording row for listings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordingSummary {
    pub recording_id: String,
    pub title: String,
    pub has_hierarchy: bool,
    pub has_audio: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job: Option<Job>,
}

pub struct Service {
    store: Arc<Store>,
    jobs: JobManager,
}

impl Service {
    pub fn open(root: impl Into<PathBuf>, providers: Providers, options: ServiceOptions) -> Result<Self, ServiceError> {
        let store = Arc::new(Store::open(root)?);
        let jobs = JobManager::new(Arc::clone(&store), providers, options.workers, options.stage_hook);
        Ok(Self { store, jobs })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn entry(&self, recording_id: &str) -> Result<RecordingEntry, ServiceError> {
        self.store
            .recording(recording_id)
            .ok_or_else(|| ServiceError::NotFound(format!("recording {recording_id}")))
    }

    /// Records the input and config for a recording without running
    /// anything. Returns the entry and the job id a run would get.
    pub fn ingest(&self, input: Input, config: Option<PipelineConfig>) -> Result<(RecordingEntry, String), ServiceError> {
        if let Some(c) = &config {
            c.validate()?;
        }
        let (recording_id, title, input_ref, input_digest, transcript, audio_path) = match input {
            Input::Recording(id) => {
                let e = self.entry(&id)?;
                (e.recording_id, e.title, e.input, e.input_digest, e.transcript, e.audio_path)
            }
            Input::Audio(path) => {
                let path = path
                    .canonicalize()
                    .map_err(|e| ServiceError::UnreadableInput(format!("{}: {e}", path.display())))?;
                let bytes = std::fs::read(&path)
                    .map_err(|e| ServiceError::UnreadableInput(format!("{}: {e}", path.display())))?;
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| ServiceError::UnreadableInput(format!("{}: no file name", path.display())))?
                    .to_string();
                let path_str = path.to_string_lossy().into_owned();
                let input = InputRef::Audio { path: path_str.clone() };
                (stem.clone(), stem, input, sha256_hex(&bytes), None, Some(path_str))
            }
            Input::Transcript(t) => {
                let object = self.store.put_object("transcript", t.to_json_pretty().as_bytes())?;
                let input = InputRef::Transcript { object: object.clone() };
                (t.recording_id().to_string(), t.title().to_string(), input, object.clone(), Some(object), None)
            }
            Input::Marked(m) => {
                let (t, _) = m.resolve().map_err(|e| ServiceError::UnreadableInput(e.to_string()))?;
                let marked = serde_json::to_vec_pretty(&m).expect("marked recording serializes");
                let object = self.store.put_object("markup", &marked)?;
                let transcript = self.store.put_object("transcript", t.to_json_pretty().as_bytes())?;
                let input = InputRef::Marked { object: object.clone() };
                (t.recording_id().to_string(), t.title().to_string(), input, object, Some(transcript), None)
            }
        };

        let config_obj = match config {
            Some(c) => {
                let bytes = serde_json::to_vec_pretty(&c).expect("config serializes");
                self.store.put_object("config", &bytes)?
            }
            None => match self.store.recording(&recording_id) {
                Some(e) if e.input_digest == input_digest => e.config,
                _ => {
                    let bytes = serde_json::to_vec_pretty(&PipelineConfig::default()).expect("config serializes");
                    self.store.put_object("config", &bytes)?
                }
            },
        };
        let job_id = job_id(&input_digest, &config_obj);

        let entry = self.store.update(|ix| {
            let fresh = RecordingEntry {
                recording_id: recording_id.clone(),
                title,
                input: input_ref,
                input_digest,
                config: config_obj,
                audio_path,
                transcript,
                hierarchy: None,
                evaluations: Default::default(),
                job_key: None,
            };
            let slot = ix.recordings.entry(recording_id.clone()).or_insert_with(|| fresh.clone());
            let same = slot.input_digest == fresh.input_digest && slot.config == fresh.config;
            if !same {
                *slot = fresh;
            }
            slot.clone()
        })?;
        Ok((entry, job_id))
    }

    /// Ingests and queues a run. Submitting the same input and config again
    /// returns the existing job, including after a restart.
    pub fn submit_job(&self, input: Input, config: Option<PipelineConfig>) -> Result<Job, ServiceError> {
        let (entry, job_id) = self.ingest(input, config)?;
        if let Some(job) = self.jobs.get(&job_id) {
            return Ok(job);
        }
        if entry.job_key.as_deref() == Some(job_id.as_str()) && entry.hierarchy.is_some() {
            return Ok(self.jobs.register_done(&job_id, &entry.recording_id));
        }
        Ok(self.jobs.enqueue(&job_id, &entry.recording_id))
    }

    pub fn get_job(&self, job_id: &str) -> Result<Job, ServiceError> {
        if let Some(j) = self.jobs.get(job_id) {
            return Ok(j);
        }
        self.store
            .index()
            .recordings
            .values()
            .find(|e| e.job_key.as_deref() == Some(job_id) && e.hierarchy.is_some())
            .map(|e| Job::done(job_id, &e.recording_id))
            .ok_or_else(|| ServiceError::JobNotFound(job_id.to_string()))
    }

    pub fn wait_job(&self, job_id: &str, timeout: Duration) -> Result<Job, ServiceError> {
        match self.jobs.wait(job_id, timeout) {
            Some(j) => Ok(j),
            None => self.get_job(job_id),
        }
    }

    pub fn list_recordings(&self) -> Vec<RecordingSummary> {
        self.store
            .index()
            .recordings
            .into_values()
            .map(|e| RecordingSummary {
                job: self.jobs.latest_for(&e.recording_id),
                recording_id: e.recording_id,
                title: e.title,
                has_hierarchy: e.hierarchy.is_some(),
                has_audio: e.audio_path.is_some(),
            })
            .collect()
    }

    fn not_ready(&self, recording_id: &str) -> ServiceError {
        let job = self.jobs.latest_for(recording_id);
        ServiceError::NotReady {
            recording_id: recording_id.to_string(),
            state: job.as_ref().map(|j| j.state),
            error: job.and_then(|j| j.error),
        }
    }

    /// The stored hierarchy artifact, byte for byte.
    pub fn get_hierarchy(&self, recording_id: &str) -> Result<Vec<u8>, ServiceError> {
        let e = self.entry(recording_id)?;
        match e.hierarchy {
            Some(obj) => Ok(self.store.object(&obj)?),
            None => Err(self.not_ready(recording_id)),
        }
    }

    pub fn get_transcript(&self, recording_id: &str) -> Result<Vec<u8>, ServiceError> {
        let e = self.entry(recording_id)?;
        match e.transcript {
            Some(obj) => Ok(self.store.object(&obj)?),
            None => Err(self.not_ready(recording_id)),
        }
    }

    pub fn get_evaluations(&self, recording_id: &str) -> Result<Vec<EvaluationReport>, ServiceError> {
        let e = self.entry(recording_id)?;
        if e.evaluations.is_empty() {
            return Err(self.not_ready(recording_id));
        }
        e.evaluations
            .values()
            .map(|obj| {
                let bytes = self.store.object(obj)?;
                serde_json::from_slice(&bytes)
                    .map_err(|err| ServiceError::UnreadableInput(format!("report {obj}: {err}")))
            })
            .collect()
    }

    pub fn get_config(&self, recording_id: &str) -> Result<PipelineConfig, ServiceError> {
        let e = self.entry(recording_id)?;
        let bytes = self.store.object(&e.config)?;
        serde_json::from_slice(&bytes)
            .map_err(|err| ServiceError::UnreadableInput(format!("config {}: {err}", e.config)))
    }

    /// Audio between `start_s` and `end_s`; `None` bounds mean the start or
    /// end of the file.
    pub fn get_audio_slice(
        &self,
        recording_id: &str,
        start_s: Option<f64>,
        end_s: Option<f64>,
    ) -> Result<AudioSlice, ServiceError> {
        let e = self.entry(recording_id)?;
        let path = e
            .audio_path
            .ok_or_else(|| ServiceError::NotFound(format!("recording {recording_id} has no audio")))?;
        let path = Path::new(&path);
        let bytes = std::fs::read(path)
            .map_err(|err| ServiceError::NotFound(format!("{}: {err}", path.display())))?;
        let fallback = match e.transcript {
            Some(obj) => {
                let t: Option<Transcript> = serde_json::from_slice(&self.store.object(&obj)?).ok();
                t.map(|t| t.audio_duration_s())
            }
            None => None,
        };
        let duration = audio::WavLayout::parse(&bytes).map(|w| w.duration_s()).or(fallback);
        let start = start_s.unwrap_or(0.0);
        let end = match (end_s, duration) {
            (Some(e), _) => e,
            (None, Some(d)) => d,
            (None, None) => return Err(self.not_ready(recording_id)),
        };
        audio::slice(&bytes, audio::content_type(path), start, end, fallback).map_err(|err| match err {
            AudioError::OutOfBounds(m) => ServiceError::RangeOutOfBounds(m),
            AudioError::Unreadable(_) => self.not_ready(recording_id),
        })
    }
}

/// Job id for an input digest and config object: the first 16 hex digits
/// of their combined SHA-256.
pub fn job_id(input_digest: &str, config_object: &str) -> String {
    let mut h = Sha256::new();
    h.update(input_digest.as_bytes());
    h.update(b"\n");
    h.update(config_object.as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}
