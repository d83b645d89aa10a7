#![allow(dead_code)]

use std::path::Path;
use std::time::Duration;

use skimsum::fixtures::synthetic_recording;
use skimsum::model::Transcript;
use skimsum::providers::Providers;
use skimsum_service::{Input, MarkedRecording, MarkedTurn, Service, ServiceOptions};

pub const WAIT: Duration = Duration::from_secs(60);

pub fn marked(id: &str, min_words: usize, seed: u64) -> MarkedRecording {
    let rec = synthetic_recording(id, min_words, seed).unwrap();
    MarkedRecording {
        recording_id: id.to_string(),
        title: Some(format!("Synthetic {id}")),
        turns: rec
            .marked_turns
            .into_iter()
            .map(|(speaker, sentences)| MarkedTurn { speaker, sentences })
            .collect(),
    }
}

pub fn marked_input(id: &str, min_words: usize, seed: u64) -> Input {
    Input::Marked(marked(id, min_words, seed))
}

pub fn open(dir: &Path) -> Service {
    Service::open(dir, Providers::fake(), ServiceOptions::default()).unwrap()
}

/// Ingests, runs to completion, and returns the job id.
pub fn process(service: &Service, input: Input) -> String {
    let job = service.submit_job(input, None).unwrap();
    let job = service.wait_job(&job.job_id, WAIT).unwrap();
    assert_eq!(job.state, skimsum_service::JobState::Done, "{job:?}");
    job.job_id
}

pub fn plain_transcript(id: &str, min_words: usize, seed: u64) -> Transcript {
    marked(id, min_words, seed).resolve().unwrap().0
}
