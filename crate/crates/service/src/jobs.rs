//! Job queue and the pipeline each job runs.
//!
//! Jobs are processed by a fixed pool of worker threads. A per-recording
//! lock keeps at most one pipeline running per recording. All artifacts of
//! a run are written first and published by a single index update at the
//! end, so a crash at any point leaves the previous index intact.

use std::collections::HashMap;
use std::path::Path;
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use skimsum::evaluation::{evaluate_strategy, Strategy};
use skimsum::hierarchy::build_hierarchy_from_chunks;
use skimsum::model::{PipelineConfig, Transcript};
use skimsum::providers::{transcribe, CorefResolver, Endpoint, Providers};
use skimsum::segmentation::segment_transcript;
use skimsum::{BuildError, EvaluationError, ProviderError, SegmentationError};

use crate::input::MarkedRecording;
use crate::store::{InputRef, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JobState {
    Queued,
    Transcribing,
    Segmenting,
    Summarizing,
    Evaluating,
    Done,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }

    /// Forward along the pipeline order, or to FAILED from any live state.
    pub fn can_advance_to(self, next: JobState) -> bool {
        !self.is_terminal() && (next == JobState::Failed || next > self)
    }

    fn progress(self) -> f64 {
        match self {
            JobState::Queued => 0.0,
            JobState::Transcribing => 0.0,
            JobState::Segmenting => 0.25,
            JobState::Summarizing => 0.5,
            JobState::Evaluating => 0.75,
            JobState::Done => 1.0,
            JobState::Failed => 0.0,
        }
    }
}

/// Failure recorded on a job. Provider failures keep the provider's code
/// and message unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobError {
    pub code: String,
    pub message: String,
}

impl JobError {
    fn new(code: &str, message: impl ToString) -> Self {
        Self { code: code.to_string(), message: message.to_string() }
    }
}

impl From<ProviderError> for JobError {
    fn from(e: ProviderError) -> Self {
        JobError::new(e.code(), &e)
    }
}

impl From<SegmentationError> for JobError {
    fn from(e: SegmentationError) -> Self {
        match e {
            SegmentationError::Provider { source, .. } => source.into(),
        }
    }
}

impl From<BuildError> for JobError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Provider(p) => p.into(),
            BuildError::Segmentation(s) => s.into(),
            BuildError::Config(c) => JobError::new("INVALID_CONFIG", c),
            other => JobError::new("BUILD_FAILED", other),
        }
    }
}

impl From<EvaluationError> for JobError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::Provider(p) => p.into(),
            EvaluationError::Segmentation(s) => s.into(),
            other => JobError::new("EVALUATION_FAILED", other),
        }
    }
}

impl From<StoreError> for JobError {
    fn from(e: StoreError) -> Self {
        JobError::new("STORE_ERROR", e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub recording_id: String,
    pub state: JobState,
    /// Fraction of pipeline stages completed.
    pub progress: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<JobError>,
}

impl Job {
    pub fn done(job_id: &str, recording_id: &str) -> Self {
        Self {
            job_id: job_id.to_string(),
            recording_id: recording_id.to_string(),
            state: JobState::Done,
            progress: 1.0,
            error: None,
        }
    }
}

/// Called on the worker thread after every state change. Tests use it to
/// hold a job at a stage boundary.
pub type StageHook = Arc<dyn Fn(&Job) + Send + Sync>;

struct Shared {
    store: Arc<Store>,
    providers: Providers,
    /// Submission order; lookups are linear but job counts are small.
    jobs: Mutex<Vec<Job>>,
    changed: Condvar,
    recording_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    hook: Option<StageHook>,
}

pub struct JobManager {
    shared: Arc<Shared>,
    queue: Mutex<Option<mpsc::Sender<String>>>,
    workers: Vec<JoinHandle<()>>,
}

impl JobManager {
    pub fn new(store: Arc<Store>, providers: Providers, workers: usize, hook: Option<StageHook>) -> Self {
        let shared = Arc::new(Shared {
            store,
            providers,
            jobs: Mutex::new(Vec::new()),
            changed: Condvar::new(),
            recording_locks: Mutex::new(HashMap::new()),
            hook,
        });
        let (tx, rx) = mpsc::channel::<String>();
        let rx = Arc::new(Mutex::new(rx));
        let workers = (0..workers.max(1))
            .map(|i| {
                let shared = Arc::clone(&shared);
                let rx = Arc::clone(&rx);
                std::thread::Builder::new()
                    .name(format!("skimsum-worker-{i}"))
                    .spawn(move || loop {
                        let next = rx.lock().expect("queue lock").recv();
                        let Ok(job_id) = next else { return };
                        shared.run(&job_id);
                    })
                    .expect("spawn worker")
            })
            .collect();
        Self { shared, queue: Mutex::new(Some(tx)), workers }
    }

    /// Queues a job unless one with this id is already known, in which
    /// case the known job is returned.
    pub fn enqueue(&self, job_id: &str, recording_id: &str) -> Job {
        let mut jobs = self.shared.jobs.lock().expect("jobs lock");
        if let Some(j) = jobs.iter().find(|j| j.job_id == job_id) {
            return j.clone();
        }
        let job = Job {
            job_id: job_id.to_string(),
            recording_id: recording_id.to_string(),
            state: JobState::Queued,
            progress: 0.0,
            error: None,
        };
        jobs.push(job.clone());
        drop(jobs);
        let queue = self.queue.lock().expect("queue lock");
        queue.as_ref().expect("manager running").send(job_id.to_string()).expect("workers alive");
        job
    }

    /// Records a job whose artifacts already exist, without running it.
    pub fn register_done(&self, job_id: &str, recording_id: &str) -> Job {
        let mut jobs = self.shared.jobs.lock().expect("jobs lock");
        if let Some(j) = jobs.iter().find(|j| j.job_id == job_id) {
            return j.clone();
        }
        let job = Job::done(job_id, recording_id);
        jobs.push(job.clone());
        job
    }

    pub fn get(&self, job_id: &str) -> Option<Job> {
        self.shared.jobs.lock().expect("jobs lock").iter().find(|j| j.job_id == job_id).cloned()
    }

    /// The running job for a recording if there is one, else its most
    /// recently submitted job.
    pub fn latest_for(&self, recording_id: &str) -> Option<Job> {
        let jobs = self.shared.jobs.lock().expect("jobs lock");
        let mine = || jobs.iter().rev().filter(|j| j.recording_id == recording_id);
        mine().find(|j| !j.state.is_terminal()).or_else(|| mine().next()).cloned()
    }

    /// Blocks until the job finishes or `timeout` passes; returns the last
    /// observed job.
    pub fn wait(&self, job_id: &str, timeout: Duration) -> Option<Job> {
        let deadline = Instant::now() + timeout;
        let mut jobs = self.shared.jobs.lock().expect("jobs lock");
        loop {
            let job = jobs.iter().find(|j| j.job_id == job_id)?.clone();
            let now = Instant::now();
            if job.state.is_terminal() || now >= deadline {
                return Some(job);
            }
            jobs = self.shared.changed.wait_timeout(jobs, deadline - now).expect("jobs lock").0;
        }
    }
}

impl Drop for JobManager {
    fn drop(&mut self) {
        self.queue.lock().expect("queue lock").take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Shared {
    fn set_state(&self, job_id: &str, state: JobState, error: Option<JobError>) {
        let job = {
            let mut jobs = self.jobs.lock().expect("jobs lock");
            let job = jobs.iter_mut().find(|j| j.job_id == job_id).expect("known job");
            debug_assert!(job.state.can_advance_to(state), "{:?} -> {state:?}", job.state);
            if !job.state.can_advance_to(state) {
                return;
            }
            job.state = state;
            if state != JobState::Failed {
                job.progress = state.progress();
            }
            job.error = error;
            job.clone()
        };
        self.changed.notify_all();
        log::info!("job {job_id} ({}) -> {state:?}", job.recording_id);
        if let Some(hook) = &self.hook {
            hook(&job);
        }
    }

    fn run(&self, job_id: &str) {
        let recording_id = match self.jobs.lock().expect("jobs lock").iter().find(|j| j.job_id == job_id) {
            Some(j) => j.recording_id.clone(),
            None => return,
        };
        let lock = Arc::clone(
            self.recording_locks.lock().expect("locks").entry(recording_id.clone()).or_default(),
        );
        let _running = lock.lock().expect("recording lock");
        if let Err(e) = self.pipeline(job_id, &recording_id) {
            log::warn!("job {job_id} failed: {}: {}", e.code, e.message);
            self.set_state(job_id, JobState::Failed, Some(e));
        }
    }

    fn pipeline(&self, job_id: &str, recording_id: &str) -> Result<(), JobError> {
        let entry = self
            .store
            .recording(recording_id)
            .ok_or_else(|| JobError::new("NOT_FOUND", format!("recording {recording_id}")))?;
        let config: PipelineConfig = serde_json::from_slice(&self.store.object(&entry.config)?)
            .map_err(|e| JobError::new("INVALID_CONFIG", e))?;
        config.validate().map_err(|e| JobError::new("INVALID_CONFIG", e))?;
        let p = &self.providers;

        self.set_state(job_id, JobState::Transcribing, None);
        let mut marked_coref = None;
        let transcript = match &entry.input {
            InputRef::Marked { object } => {
                let marked: MarkedRecording = serde_json::from_slice(&self.store.object(object)?)
                    .map_err(|e| JobError::new("UNREADABLE_INPUT", e))?;
                let (t, coref) = marked.resolve().map_err(|e| JobError::new("UNREADABLE_INPUT", e))?;
                marked_coref = Some(coref);
                t
            }
            _ if entry.transcript.is_some() => {
                let bytes = self.store.object(entry.transcript.as_deref().expect("checked"))?;
                serde_json::from_slice::<Transcript>(&bytes)
                    .map_err(|e| JobError::new("UNREADABLE_INPUT", e))?
            }
            InputRef::Audio { path } => transcribe(Path::new(path), p.transcriber.as_ref())?,
            InputRef::Transcript { object } => {
                return Err(JobError::new("UNREADABLE_INPUT", format!("transcript {object} not indexed")));
            }
        };
        let transcript_obj = self.store.put_object("transcript", transcript.to_json_pretty().as_bytes())?;

        self.set_state(job_id, JobState::Segmenting, None);
        // inline markup answers coreference only when no live resolver is configured
        let coref: &dyn CorefResolver = match &marked_coref {
            Some(c) if p.coref.descriptor().endpoint == Endpoint::Fake => c,
            _ => p.coref.as_ref(),
        };
        let chunks = segment_transcript(&transcript, coref, &config, p.parallelism)?;

        self.set_state(job_id, JobState::Summarizing, None);
        let h = build_hierarchy_from_chunks(&transcript, &chunks, p, &config)?;
        let hierarchy_obj = self.store.put_object("hierarchy", &h.to_json_bytes())?;

        self.set_state(job_id, JobState::Evaluating, None);
        let eval_providers = match &marked_coref {
            Some(c) if p.coref.descriptor().endpoint == Endpoint::Fake => p.clone().with_coref(c.clone()),
            _ => p.clone(),
        };
        let mut evaluations = Vec::new();
        for strategy in [Strategy::NaiveFixed, Strategy::CorefSemantic] {
            let report = evaluate_strategy(&transcript, strategy, &eval_providers, &config)?;
            let bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
            evaluations.push((strategy.label().to_string(), self.store.put_object("evaluation", &bytes)?));
        }

        let published = self.store.update(|ix| {
            let Some(e) = ix.recordings.get_mut(recording_id) else { return false };
            // a newer ingest replaced the input or config while this ran
            if e.input_digest != entry.input_digest || e.config != entry.config {
                return false;
            }
            e.transcript = Some(transcript_obj);
            e.hierarchy = Some(hierarchy_obj);
            e.evaluations = evaluations.into_iter().collect();
            e.job_key = Some(job_id.to_string());
            true
        })?;
        if !published {
            return Err(JobError::new("SUPERSEDED", "recording was re-ingested while the job ran"));
        }
        self.set_state(job_id, JobState::Done, None);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitions_are_monotone() {
        use JobState::*;
        assert!(Queued.can_advance_to(Transcribing));
        assert!(Summarizing.can_advance_to(Failed));
        assert!(!Summarizing.can_advance_to(Segmenting));
        assert!(!Done.can_advance_to(Failed));
        assert!(!Failed.can_advance_to(Done));
    }

    #[test]
    fn provider_errors_pass_through() {
        let p = ProviderError::EmptyOutput { provider: "s".into() };
        let e: JobError = BuildError::Segmentation(SegmentationError::Provider { turn: 2, source: p.clone() }).into();
        assert_eq!(e, JobError { code: "EMPTY_OUTPUT".into(), message: p.to_string() });
    }
}
