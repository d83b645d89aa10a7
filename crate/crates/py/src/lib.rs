//! Python bindings: transcripts, pipeline config, hierarchy building and
//! evaluation, all running on the offline fake providers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use skimsum::evaluation::{evaluate_strategy, heuristic_score as score, Strategy};
use skimsum::fixtures;
use skimsum::hierarchy::build_hierarchy as build;
use skimsum::model::{self, validate_transcript, Level, TranscriptBuilder};
use skimsum::providers::markup::marked_transcript as parse_marked;
use skimsum::providers::{FakeCoref, FakeEmbedder, FakeScorer, Providers};
use skimsum::segmentation::naive_fixed_segment;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, name = "PipelineConfig")]
struct PyPipelineConfig {
    inner: model::PipelineConfig,
}

#[pymethods]
impl PyPipelineConfig {
    /// Defaults, overridden by any fields in `json`.
    #[new]
    #[pyo3(signature = (json=None))]
    fn new(json: Option<&str>) -> PyResult<Self> {
        let inner = match json {
            Some(j) => model::PipelineConfig::from_json(j).map_err(value_err)?,
            None => model::PipelineConfig::default(),
        };
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("config serializes")
    }

    #[getter]
    fn compression_ratio(&self) -> f64 {
        self.inner.compression_ratio
    }

    #[getter]
    fn naive_segment_len(&self) -> usize {
        self.inner.naive_segment_len
    }

    #[getter]
    fn stem_cutoff_words(&self) -> usize {
        self.inner.stem_cutoff_words
    }

    #[getter]
    fn cluster_distance_threshold(&self) -> f64 {
        self.inner.cluster_distance_threshold
    }
}

#[pyclass(frozen, name = "Transcript")]
struct PyTranscript {
    inner: model::Transcript,
}

#[pymethods]
impl PyTranscript {
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        model::Transcript::from_json(json).map(|inner| Self { inner }).map_err(value_err)
    }

    /// Builds a transcript from `(speaker, [sentence, ...])` turns with
    /// evenly paced word timings.
    #[staticmethod]
    #[pyo3(signature = (recording_id, turns, seconds_per_word=0.4))]
    fn from_turns(recording_id: &str, turns: Vec<(String, Vec<String>)>, seconds_per_word: f64) -> Self {
        let mut b = TranscriptBuilder::new(recording_id, recording_id).seconds_per_word(seconds_per_word);
        for (speaker, sentences) in turns {
            b = b.turn(&speaker, sentences);
        }
        Self { inner: b.build() }
    }

    fn to_json(&self) -> String {
        self.inner.to_json_pretty()
    }

    #[getter]
    fn recording_id(&self) -> &str {
        self.inner.recording_id()
    }

    #[getter]
    fn word_count(&self) -> usize {
        self.inner.words().len()
    }

    #[getter]
    fn sentence_count(&self) -> usize {
        self.inner.sentences().len()
    }

    #[getter]
    fn turn_count(&self) -> usize {
        self.inner.turns().len()
    }

    #[getter]
    fn audio_duration_s(&self) -> f64 {
        self.inner.audio_duration_s()
    }
}

/// Offline coreference answers taken from inline markup.
#[pyclass(frozen, name = "MarkupCoref")]
struct PyMarkupCoref {
    inner: FakeCoref,
}

type NodeRow = (String, String, (usize, usize));

#[pyclass(frozen, name = "Hierarchy")]
struct PyHierarchy {
    inner: model::Hierarchy,
}

fn parse_level(level: &str) -> PyResult<Level> {
    match level.to_ascii_uppercase().as_str() {
        "LONG" => Ok(Level::Long),
        "MEDIUM" => Ok(Level::Medium),
        "SHORT" => Ok(Level::Short),
        other => Err(PyValueError::new_err(format!("unknown level {other:?}"))),
    }
}

#[pymethods]
impl PyHierarchy {
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        model::Hierarchy::from_json(json.as_bytes()).map(|inner| Self { inner }).map_err(value_err)
    }

    fn to_json(&self) -> String {
        String::from_utf8(self.inner.to_json_bytes()).expect("JSON is UTF-8")
    }

    fn level_count(&self, level: &str) -> PyResult<usize> {
        Ok(self.inner.level_count(parse_level(level)?))
    }

    /// `(id, text, (first_sentence, last_sentence))` for each node of a level.
    fn nodes(&self, level: &str) -> PyResult<Vec<NodeRow>> {
        let level = parse_level(level)?;
        Ok(self
            .inner
            .level_nodes(level)
            .map(|n| (n.id.clone(), n.text.clone(), (n.transcript_span.first(), n.transcript_span.last())))
            .collect())
    }

    fn children(&self, id: &str) -> Vec<String> {
        self.inner.children(id).map(|n| n.id.clone()).collect()
    }

    #[getter]
    fn dropped(&self) -> usize {
        self.inner.drop_ledger.len()
    }
}

fn providers(coref: Option<&PyMarkupCoref>) -> Providers {
    match coref {
        Some(c) => Providers::fake().with_coref(c.inner.clone()),
        None => Providers::fake(),
    }
}

fn config(c: Option<&PyPipelineConfig>) -> model::PipelineConfig {
    c.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyfunction]
fn word_count(text: &str) -> usize {
    skimsum::text::word_count(text)
}

/// Splits `words` into consecutive runs of at most `limit`.
#[pyfunction]
#[pyo3(signature = (words, limit=60))]
fn naive_segment(words: Vec<String>, limit: usize) -> PyResult<Vec<Vec<String>>> {
    if limit == 0 {
        return Err(PyValueError::new_err("limit must be positive"));
    }
    Ok(naive_fixed_segment(&words, limit).into_iter().map(<[String]>::to_vec).collect())
}

/// Invariant violations of a transcript artifact given as JSON.
#[pyfunction]
fn validate(json: &str) -> PyResult<Vec<String>> {
    let artifact: model::TranscriptArtifact = serde_json::from_str(json).map_err(value_err)?;
    Ok(validate_transcript(&artifact).iter().map(ToString::to_string).collect())
}

/// Transcript and coreference answers from turns whose sentences carry
/// `⟨label:mention⟩` markup.
#[pyfunction]
fn marked_transcript(recording_id: &str, turns: Vec<(String, Vec<String>)>) -> PyResult<(PyTranscript, PyMarkupCoref)> {
    let (t, coref) = parse_marked(
        recording_id,
        turns.iter().map(|(s, sents)| (s.as_str(), sents.iter().map(String::as_str))),
    )
    .map_err(value_err)?;
    Ok((PyTranscript { inner: t }, PyMarkupCoref { inner: coref }))
}

/// Seeded multi-speaker recording with coreference markup.
#[pyfunction]
fn synthetic_recording(recording_id: &str, min_words: usize, seed: u64) -> PyResult<(PyTranscript, PyMarkupCoref)> {
    let rec = fixtures::synthetic_recording(recording_id, min_words, seed).map_err(value_err)?;
    Ok((PyTranscript { inner: rec.transcript }, PyMarkupCoref { inner: rec.coref }))
}

#[pyfunction]
#[pyo3(signature = (transcript, config=None, coref=None))]
fn build_hierarchy(
    py: Python<'_>,
    transcript: &PyTranscript,
    config: Option<&PyPipelineConfig>,
    coref: Option<&PyMarkupCoref>,
) -> PyResult<PyHierarchy> {
    let (p, cfg) = (providers(coref), self::config(config));
    let t = &transcript.inner;
    py.detach(|| build(t, &p, &cfg))
        .map(|inner| PyHierarchy { inner })
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `(coherence, retention, mean)` under the fake scorer and embedder.
#[pyfunction]
fn heuristic_score(reference: &str, candidate: &str) -> PyResult<(f64, f64, f64)> {
    let s = score(reference, candidate, &FakeScorer::new(), &FakeEmbedder::default())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((s.coherence, s.retention, s.mean))
}

/// Evaluation report JSON for `strategy` (`"naive"` or `"semantic"`).
#[pyfunction]
#[pyo3(signature = (transcript, strategy, config=None, coref=None))]
fn evaluate(
    py: Python<'_>,
    transcript: &PyTranscript,
    strategy: &str,
    config: Option<&PyPipelineConfig>,
    coref: Option<&PyMarkupCoref>,
) -> PyResult<String> {
    let strategy = match strategy {
        "naive" | "NAIVE_FIXED" => Strategy::NaiveFixed,
        "semantic" | "COREF_SEMANTIC" => Strategy::CorefSemantic,
        other => return Err(PyValueError::new_err(format!("unknown strategy {other:?}"))),
    };
    let (p, cfg) = (providers(coref), self::config(config));
    let t = &transcript.inner;
    let report = py
        .detach(|| evaluate_strategy(t, strategy, &p, &cfg))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
fn skimsum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyTranscript>()?;
    m.add_class::<PyMarkupCoref>()?;
    m.add_class::<PyHierarchy>()?;
    m.add_function(wrap_pyfunction!(word_count, m)?)?;
    m.add_function(wrap_pyfunction!(naive_segment, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(marked_transcript, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_recording, m)?)?;
    m.add_function(wrap_pyfunction!(build_hierarchy, m)?)?;
    m.add_function(wrap_pyfunction!(heuristic_score, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
