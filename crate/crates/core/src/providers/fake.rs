//! Deterministic offline providers. Every fake is a pure function of its
//! inputs and construction parameters.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::markup::{self, MarkupError, OPEN};
use super::{
    CorefResolver, Embedder, LocalClusters, ProviderDescriptor, ProviderKind, Scorer, Summarizer,
    Transcriber,
};
use crate::error::ProviderError;
use crate::model::TranscriptArtifact;
use crate::text::{join_words, take_words};

/// Echoes fixture transcripts. Looks up registered fixtures first, then a
/// `<audio>.transcript.json` sidecar next to the audio file.
#[derive(Debug, Clone)]
pub struct FakeTranscriber {
    descriptor: ProviderDescriptor,
    fixtures: HashMap<PathBuf, TranscriptArtifact>,
}

impl FakeTranscriber {
    pub fn new() -> Self {
        Self {
            descriptor: ProviderDescriptor::fake(ProviderKind::Transcriber, "fake-transcriber"),
            fixtures: HashMap::new(),
        }
    }

    pub fn with_fixture(mut self, audio: impl Into<PathBuf>, t: TranscriptArtifact) -> Self {
        self.fixtures.insert(audio.into(), t);
        self
    }

    pub fn sidecar_path(audio: &Path) -> PathBuf {
        let mut name = audio.file_name().unwrap_or_default().to_os_string();
        name.push(".transcript.json");
        audio.with_file_name(name)
    }
}

impl Default for FakeTranscriber {
    fn default() -> Self {
        Self::new()
    }
}

impl Transcriber for FakeTranscriber {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn transcribe(&self, audio: &Path) -> Result<TranscriptArtifact, ProviderError> {
        if let Some(t) = self.fixtures.get(audio) {
            return Ok(t.clone());
        }
        let sidecar = Self::sidecar_path(audio);
        let bytes = std::fs::read(&sidecar).map_err(|e| {
            ProviderError::InvalidInput(format!(
                "no fixture transcript for {} ({}: {e})",
                audio.display(),
                sidecar.display()
            ))
        })?;
        serde_json::from_slice(&bytes)
            .map_err(|e| ProviderError::malformed(&self.descriptor.name, e.to_string()))
    }
}

/// Coreference from inline fixture markup.
///
/// Turn text is matched against registered marked-up turns by its plain
/// form; unregistered text is parsed for markup directly, and plain text
/// without markup yields no clusters.
#[derive(Debug, Clone)]
pub struct FakeCoref {
    descriptor: ProviderDescriptor,
    registry: HashMap<String, LocalClusters>,
}

impl FakeCoref {
    pub fn new() -> Self {
        Self {
            descriptor: ProviderDescriptor::fake(ProviderKind::Coreference, "fake-coref"),
            registry: HashMap::new(),
        }
    }

    /// Registers a marked-up turn.
    pub fn register(&mut self, marked_turn: &str) -> Result<(), MarkupError> {
        let m = markup::parse(marked_turn)?;
        self.registry.insert(m.text, to_local(&m.clusters));
        Ok(())
    }
}

impl Default for FakeCoref {
    fn default() -> Self {
        Self::new()
    }
}

fn to_local(clusters: &[(String, Vec<[usize; 2]>)]) -> LocalClusters {
    clusters
        .iter()
        .map(|(_, spans)| spans.iter().map(|&[s, e]| [s as i64, e as i64]).collect())
        .collect()
}

impl CorefResolver for FakeCoref {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn resolve(&self, turn_text: &str) -> Result<LocalClusters, ProviderError> {
        let key = join_words(turn_text.split_whitespace());
        if let Some(c) = self.registry.get(&key) {
            return Ok(c.clone());
        }
        if !turn_text.contains(OPEN) {
            return Ok(Vec::new());
        }
        let m = markup::parse(turn_text)
            .map_err(|e| ProviderError::InvalidInput(format!("bad markup: {e}")))?;
        Ok(to_local(&m.clusters))
    }
}

/// Extractive stand-in: the first `max_output_words` words.
#[derive(Debug, Clone)]
pub struct FakeSummarizer {
    descriptor: ProviderDescriptor,
}

impl FakeSummarizer {
    pub fn new() -> Self {
        Self { descriptor: ProviderDescriptor::fake(ProviderKind::Summarizer, "fake-summarizer") }
    }
}

impl Default for FakeSummarizer {
    fn default() -> Self {
        Self::new()
    }
}

impl Summarizer for FakeSummarizer {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn summarize(&self, text: &str, max_output_words: usize) -> Result<String, ProviderError> {
        Ok(take_words(text, max_output_words))
    }
}

/// Feature-hashing embedder over the case-folded token multiset.
///
/// Each distinct token adds `±count` to a few hashed coordinates, so texts
/// sharing vocabulary land close together and word order is ignored.
#[derive(Debug, Clone)]
pub struct FakeEmbedder {
    descriptor: ProviderDescriptor,
    dim: usize,
    seed: u64,
}

const SLOTS_PER_TOKEN: usize = 2;

impl FakeEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            descriptor: ProviderDescriptor::fake(ProviderKind::Embedder, "fake-embedder"),
            dim,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn digest(&self, text: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(text.as_bytes());
        h.finalize().into()
    }
}

impl Default for FakeEmbedder {
    fn default() -> Self {
        Self::new(64, 0x5EED)
    }
}

/// Lowercased token with surrounding punctuation trimmed, or the raw
/// lowercased token when nothing alphanumeric remains.
pub(crate) fn normalize_token(tok: &str) -> String {
    let lower = tok.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        lower
    } else {
        trimmed.to_string()
    }
}

impl Embedder for FakeEmbedder {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for tok in text.split_whitespace() {
            *counts.entry(normalize_token(tok)).or_default() += 1;
        }
        let mut v = vec![0.0; self.dim];
        for (tok, count) in &counts {
            let d = self.digest(tok);
            for slot in 0..SLOTS_PER_TOKEN {
                let b = &d[slot * 9..slot * 9 + 9];
                let idx = u64::from_le_bytes(b[..8].try_into().expect("8 bytes")) as usize % self.dim;
                let sign = if b[8] & 1 == 0 { 1.0 } else { -1.0 };
                v[idx] += sign * f64::from(*count);
            }
        }
        if v.iter().all(|x| *x == 0.0) {
            // hash cancellation or no tokens; fall back to the whole text
            let d = self.digest(text);
            for (i, x) in v.iter_mut().enumerate() {
                *x = f64::from(d[i % 32]) - 127.5;
            }
        }
        Ok(v)
    }
}

/// Token-overlap F1 between case-folded token multisets.
#[derive(Debug, Clone)]
pub struct FakeScorer {
    descriptor: ProviderDescriptor,
}

impl FakeScorer {
    pub fn new() -> Self {
        Self { descriptor: ProviderDescriptor::fake(ProviderKind::Scorer, "fake-scorer") }
    }
}

impl Default for FakeScorer {
    fn default() -> Self {
        Self::new()
    }
}

impl Scorer for FakeScorer {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn score(&self, reference: &str, candidate: &str) -> Result<f64, ProviderError> {
        let bag = |s: &str| {
            let mut m: HashMap<String, usize> = HashMap::new();
            for t in s.split_whitespace() {
                *m.entry(t.to_lowercase()).or_default() += 1;
            }
            m
        };
        let r = bag(reference);
        let c = bag(candidate);
        let r_total: usize = r.values().sum();
        let c_total: usize = c.values().sum();
        if r_total == 0 || c_total == 0 {
            return Err(ProviderError::InvalidInput("cannot score empty text".into()));
        }
        let overlap: usize = c.iter().map(|(t, n)| (*n).min(*r.get(t).unwrap_or(&0))).sum();
        if overlap == 0 {
            return Ok(0.0);
        }
        // 2PR/(P+R) == 2·overlap/(|r|+|c|), exact 1.0 for identical bags
        Ok(2.0 * overlap as f64 / (r_total + c_total) as f64)
    }
}
