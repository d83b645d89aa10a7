//! Pipeline inputs and how they are read from files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use skimsum::model::Transcript;
use skimsum::providers::markup::{marked_transcript, MarkupError};
use skimsum::providers::FakeCoref;

use crate::error::ServiceError;

/// A transcript given as speaker turns whose sentences carry inline
/// coreference markup (`⟨e1:the ferry⟩`). Offline runs use the markup as
/// the coreference answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedRecording {
    pub recording_id: String,
    #[serde(default)]
    pub title: Option<String>,
    pub turns: Vec<MarkedTurn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedTurn {
    pub speaker: String,
    pub sentences: Vec<String>,
}

impl MarkedRecording {
    pub fn resolve(&self) -> Result<(Transcript, FakeCoref), MarkupError> {
        let (t, coref) = marked_transcript(
            &self.recording_id,
            self.turns.iter().map(|t| (t.speaker.as_str(), t.sentences.iter().map(String::as_str))),
        )?;
        let Some(title) = &self.title else { return Ok((t, coref)) };
        let mut artifact = t.artifact().clone();
        artifact.title = title.clone();
        let t = Transcript::try_from(artifact).expect("title does not affect validity");
        Ok((t, coref))
    }
}

#[derive(Debug, Clone)]
pub enum Input {
    Audio(PathBuf),
    Transcript(Transcript),
    Marked(MarkedRecording),
    /// Re-run an already ingested recording.
    Recording(String),
}

impl Input {
    /// `.json` files are transcripts or marked recordings; anything else
    /// is audio.
    pub fn from_path(path: &Path) -> Result<Self, ServiceError> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if !is_json {
            return Ok(Input::Audio(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::UnreadableInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            ServiceError::UnreadableInput(m) => {
                ServiceError::UnreadableInput(format!("{}: {m}", path.display()))
            }
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ServiceError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ServiceError::UnreadableInput(e.to_string()))?;
        let marked = value
            .get("turns")
            .and_then(|t| t.get(0))
            .is_some_and(|t| t.get("sentences").is_some());
        if marked {
            serde_json::from_value(value)
                .map(Input::Marked)
                .map_err(|e| ServiceError::UnreadableInput(format!("marked recording: {e}")))
        } else {
            serde_json::from_value(value)
                .map(Input::Transcript)
                .map_err(|e| ServiceError::UnreadableInput(format!("transcript: {e}")))
        }
    }
}
