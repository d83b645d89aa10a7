//! Contracts for the external model capabilities.
//!
//! Each capability is a small object-safe trait. Implementations return raw
//! provider output; the free functions in this module are the trust
//! boundary that validates it and converts it into core types before
//! anything else sees it.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ProviderError;
use crate::model::{
    validate_transcript, CorefAnnotation, EmbeddingVector, EntityCluster, IndexRange,
    MentionSpan, Transcript, TranscriptArtifact,
};
use crate::text::{join_words, take_words, word_count};

pub mod fake;
pub mod markup;
pub mod remote;

pub use fake::{FakeCoref, FakeEmbedder, FakeScorer, FakeSummarizer, FakeTranscriber};
pub use remote::{
    RemoteCoref, RemoteEmbedder, RemoteOptions, RemoteScorer, RemoteSummarizer,
    RemoteTranscriber,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProviderKind {
    Transcriber,
    Coreference,
    Summarizer,
    Embedder,
    Scorer,
}

impl ProviderKind {
    pub const ALL: [ProviderKind; 5] = [
        ProviderKind::Transcriber,
        ProviderKind::Coreference,
        ProviderKind::Summarizer,
        ProviderKind::Embedder,
        ProviderKind::Scorer,
    ];

    /// Environment variable prefix, e.g. `DS_COREF`.
    pub fn env_prefix(self) -> &'static str {
        match self {
            ProviderKind::Transcriber => "DS_TRANSCRIBER",
            ProviderKind::Coreference => "DS_COREF",
            ProviderKind::Summarizer => "DS_SUMMARIZER",
            ProviderKind::Embedder => "DS_EMBEDDER",
            ProviderKind::Scorer => "DS_SCORER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Endpoint {
    Fake,
    Url(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub kind: ProviderKind,
    pub name: String,
    pub endpoint: Endpoint,
    pub model_identifier: String,
}

impl ProviderDescriptor {
    pub fn fake(kind: ProviderKind, name: &str) -> Self {
        Self {
            kind,
            name: name.to_string(),
            endpoint: Endpoint::Fake,
            model_identifier: "fake".to_string(),
        }
    }
}

pub trait Transcriber: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;
    fn transcribe(&self, audio: &Path) -> Result<TranscriptArtifact, ProviderError>;
}

/// Coreference clusters over the whitespace tokens of `turn_text`, as
/// inclusive turn-local `[start, end]` token indices. Signed so that bad
/// provider output can be detected rather than wrapped.
pub type LocalClusters = Vec<Vec<[i64; 2]>>;

pub trait CorefResolver: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;
    fn resolve(&self, turn_text: &str) -> Result<LocalClusters, ProviderError>;
}

pub trait Summarizer: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;
    fn summarize(&self, text: &str, max_output_words: usize) -> Result<String, ProviderError>;
}

pub trait Embedder: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

pub trait Scorer: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;
    fn score(&self, reference: &str, candidate: &str) -> Result<f64, ProviderError>;
}

/// One provider per capability plus the fan-out bound for concurrent calls.
#[derive(Clone)]
pub struct Providers {
    pub transcriber: Arc<dyn Transcriber>,
    pub coref: Arc<dyn CorefResolver>,
    pub summarizer: Arc<dyn Summarizer>,
    pub embedder: Arc<dyn Embedder>,
    pub scorer: Arc<dyn Scorer>,
    pub parallelism: usize,
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Providers")
            .field("transcriber", self.transcriber.descriptor())
            .field("coref", self.coref.descriptor())
            .field("summarizer", self.summarizer.descriptor())
            .field("embedder", self.embedder.descriptor())
            .field("scorer", self.scorer.descriptor())
            .field("parallelism", &self.parallelism)
            .finish()
    }
}

pub const DEFAULT_PARALLELISM: usize = 4;

impl Providers {
    /// All-fake bundle for offline use.
    pub fn fake() -> Self {
        Self {
            transcriber: Arc::new(FakeTranscriber::new()),
            coref: Arc::new(FakeCoref::new()),
            summarizer: Arc::new(FakeSummarizer::new()),
            embedder: Arc::new(FakeEmbedder::default()),
            scorer: Arc::new(FakeScorer::new()),
            parallelism: DEFAULT_PARALLELISM,
        }
    }

    pub fn with_coref(mut self, coref: impl CorefResolver + 'static) -> Self {
        self.coref = Arc::new(coref);
        self
    }

    pub fn with_summarizer(mut self, s: impl Summarizer + 'static) -> Self {
        self.summarizer = Arc::new(s);
        self
    }

    pub fn with_embedder(mut self, e: impl Embedder + 'static) -> Self {
        self.embedder = Arc::new(e);
        self
    }

    pub fn with_scorer(mut self, s: impl Scorer + 'static) -> Self {
        self.scorer = Arc::new(s);
        self
    }

    pub fn with_transcriber(mut self, t: impl Transcriber + 'static) -> Self {
        self.transcriber = Arc::new(t);
        self
    }

    /// Remote provider for every `DS_*_URL` variable that is set, fake for
    /// the rest. `DS_*_TOKEN` supplies a bearer token.
    pub fn from_env(options: RemoteOptions) -> Result<Self, ProviderError> {
        let mut p = Self::fake();
        let var = |kind: ProviderKind, suffix: &str| {
            std::env::var(format!("{}_{suffix}", kind.env_prefix())).ok().filter(|v| !v.is_empty())
        };
        for kind in ProviderKind::ALL {
            let Some(url) = var(kind, "URL") else { continue };
            let token = var(kind, "TOKEN");
            let model = var(kind, "MODEL").unwrap_or_else(|| "remote".to_string());
            let client = remote::RemoteClient::new(kind, &url, token, model, options.clone())?;
            match kind {
                ProviderKind::Transcriber => p.transcriber = Arc::new(RemoteTranscriber::new(client)),
                ProviderKind::Coreference => p.coref = Arc::new(RemoteCoref::new(client)),
                ProviderKind::Summarizer => p.summarizer = Arc::new(RemoteSummarizer::new(client)),
                ProviderKind::Embedder => p.embedder = Arc::new(RemoteEmbedder::new(client)),
                ProviderKind::Scorer => p.scorer = Arc::new(RemoteScorer::new(client)),
            }
        }
        Ok(p)
    }
}

/// Transcribes audio and validates the result.
pub fn transcribe(audio: &Path, provider: &dyn Transcriber) -> Result<Transcript, ProviderError> {
    if !audio.is_file() {
        return Err(ProviderError::InvalidInput(format!(
            "audio {} is not a readable file",
            audio.display()
        )));
    }
    let artifact = provider.transcribe(audio)?;
    let violations = validate_transcript(&artifact);
    if !violations.is_empty() {
        return Err(ProviderError::MalformedResponse {
            provider: provider.descriptor().name.clone(),
            detail: format!("transcript fails validation ({} violations)", violations.len()),
            violations,
        });
    }
    Ok(Transcript::try_from(artifact).expect("validated above"))
}

/// Resolves coreferences for one speaker turn and converts the mentions to
/// transcript-global word indices.
pub fn resolve_coreferences(
    transcript: &Transcript,
    turn_index: usize,
    provider: &dyn CorefResolver,
) -> Result<CorefAnnotation, ProviderError> {
    let turn_words = transcript.turn_word_range(turn_index);
    let text = transcript.turn_text(turn_index);
    if text.is_empty() {
        return Err(ProviderError::InvalidInput("empty turn text".into()));
    }
    let name = &provider.descriptor().name;
    let local = provider.resolve(&text)?;

    let n = turn_words.len() as i64;
    let offset = turn_words.first();
    let mut clusters = Vec::with_capacity(local.len());
    for (id, spans) in local.into_iter().enumerate() {
        if spans.is_empty() {
            return Err(ProviderError::malformed(name, format!("cluster {id} has no mentions")));
        }
        let mut mentions = Vec::with_capacity(spans.len());
        for [s, e] in spans {
            if s < 0 || e < s || e >= n {
                return Err(ProviderError::malformed(
                    name,
                    format!("mention [{s}, {e}] outside turn of {n} words"),
                ));
            }
            let (start, end) = (offset + s as usize, offset + e as usize);
            let first_sentence = transcript.sentence_of_word(start).expect("inside turn");
            let last_sentence = transcript.sentence_of_word(end).expect("inside turn");
            mentions.push(MentionSpan {
                start_word: start,
                end_word: end,
                sentence_span: IndexRange::new(first_sentence, last_sentence).expect("ordered"),
                text: join_words(transcript.words()[start..=end].iter().map(|w| &w.text)),
            });
        }
        clusters.push(
            EntityCluster::new(id, mentions).map_err(|e| ProviderError::malformed(name, e.to_string()))?,
        );
    }
    Ok(CorefAnnotation { turn_index, clusters })
}

/// Summarizes `text` into at most `max_output_words` words.
///
/// Output over budget is logged and truncated; empty output is an
/// [`ProviderError::EmptyOutput`] so callers can fall back to the input.
pub fn summarize_text(
    text: &str,
    max_output_words: usize,
    provider: &dyn Summarizer,
) -> Result<String, ProviderError> {
    if word_count(text) == 0 {
        return Err(ProviderError::InvalidInput("summarizer input has no words".into()));
    }
    if max_output_words == 0 {
        return Err(ProviderError::InvalidInput("summary budget must be positive".into()));
    }
    let out = provider.summarize(text, max_output_words)?;
    let n = word_count(&out);
    if n == 0 {
        return Err(ProviderError::EmptyOutput { provider: provider.descriptor().name.clone() });
    }
    if n > max_output_words {
        log::warn!(
            "{} returned {n} words for a budget of {max_output_words}; truncating",
            provider.descriptor().name
        );
        return Ok(take_words(&out, max_output_words));
    }
    Ok(join_words(out.split_whitespace()))
}

/// Embeds `text` and normalizes to unit length.
pub fn embed(text: &str, provider: &dyn Embedder) -> Result<EmbeddingVector, ProviderError> {
    if text.trim().is_empty() {
        return Err(ProviderError::InvalidInput("cannot embed empty text".into()));
    }
    let raw = provider.embed(text)?;
    EmbeddingVector::normalized(raw)
        .map_err(|e| ProviderError::malformed(&provider.descriptor().name, e.to_string()))
}

/// Coherence score in `[-1, 1]`.
pub fn score_similarity(
    reference: &str,
    candidate: &str,
    provider: &dyn Scorer,
) -> Result<f64, ProviderError> {
    if reference.trim().is_empty() || candidate.trim().is_empty() {
        return Err(ProviderError::InvalidInput("cannot score empty text".into()));
    }
    let s = provider.score(reference, candidate)?;
    if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
        return Err(ProviderError::malformed(
            &provider.descriptor().name,
            format!("score {s} outside [-1, 1]"),
        ));
    }
    Ok(s)
}

/// Maps `f` over `items` on at most `parallelism` threads, preserving order.
pub(crate) fn bounded_map<T, R, F>(items: &[T], parallelism: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let workers = parallelism.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no poisoning")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no poisoning")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TranscriptBuilder;

    struct Canned(ProviderDescriptor, LocalClusters);

    impl CorefResolver for Canned {
        fn descriptor(&self) -> &ProviderDescriptor {
            &self.0
        }
        fn resolve(&self, _: &str) -> Result<LocalClusters, ProviderError> {
            Ok(self.1.clone())
        }
    }

    fn canned(c: LocalClusters) -> Canned {
        Canned(ProviderDescriptor::fake(ProviderKind::Coreference, "canned"), c)
    }

    fn transcript() -> Transcript {
        TranscriptBuilder::new("r", "t")
            .turn("A", ["one two three."])
            .turn("B", ["The cat sat.", "It purred loudly."])
            .build()
    }

    #[test]
    fn coref_indices_become_global() {
        let t = transcript();
        let ann = resolve_coreferences(&t, 1, &canned(vec![vec![[0, 1], [3, 3]]])).unwrap();
        assert_eq!(ann.turn_index, 1);
        let m = ann.clusters[0].mentions();
        assert_eq!((m[0].start_word, m[0].end_word), (3, 4));
        assert_eq!(m[0].text, "The cat");
        assert_eq!(m[1].start_word, 6);
        assert_eq!(m[1].sentence_span, IndexRange::single(2));
    }

    #[test]
    fn coref_rejects_out_of_turn_indices() {
        let t = transcript();
        for bad in [vec![vec![[-1, 0]]], vec![vec![[0, 6]]], vec![vec![]], vec![vec![[2, 1]]]] {
            let err = resolve_coreferences(&t, 1, &canned(bad)).unwrap_err();
            assert_eq!(err.code(), "MALFORMED_RESPONSE");
        }
    }

    struct Verbose(ProviderDescriptor);

    impl Summarizer for Verbose {
        fn descriptor(&self) -> &ProviderDescriptor {
            &self.0
        }
        fn summarize(&self, text: &str, _: usize) -> Result<String, ProviderError> {
            Ok(format!("{text} {text}"))
        }
    }

    #[test]
    fn summarize_truncates_over_budget() {
        let v = Verbose(ProviderDescriptor::fake(ProviderKind::Summarizer, "verbose"));
        assert_eq!(summarize_text("a b c", 4, &v).unwrap(), "a b c a");
        assert!(summarize_text("  ", 4, &v).is_err());
        assert!(summarize_text("a", 0, &v).is_err());
    }

    #[test]
    fn bounded_map_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = bounded_map(&items, 4, |x| x * 2);
        assert_eq!(out, (0..100).map(|x| x * 2).collect::<Vec<_>>());
        assert!(bounded_map(&Vec::<usize>::new(), 4, |x| *x).is_empty());
    }
}
