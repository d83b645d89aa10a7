use std::fmt;

use serde::{Deserialize, Serialize};

use super::range::IndexRange;
use crate::error::ModelError;
use crate::text::join_words;

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    pub index: usize,
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    pub speaker: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub word_range: IndexRange,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerTurn {
    pub index: usize,
    pub speaker: String,
    pub sentence_range: IndexRange,
}

/// Unchecked transcript, exactly as stored on disk or received from a
/// transcription provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptArtifact {
    pub schema_version: u32,
    pub recording_id: String,
    pub title: String,
    pub audio_duration_s: f64,
    pub words: Vec<WordToken>,
    pub sentences: Vec<Sentence>,
    pub turns: Vec<SpeakerTurn>,
}

/// One broken transcript invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: String,
    pub index: usize,
}

impl Violation {
    fn new(invariant: impl Into<String>, index: usize) -> Self {
        Self { invariant: invariant.into(), index }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @{}", self.invariant, self.index)
    }
}

/// Checks every transcript invariant and reports all findings. An empty
/// result means the artifact can be promoted to a [`Transcript`].
pub fn validate_transcript(t: &TranscriptArtifact) -> Vec<Violation> {
    let mut out = Vec::new();

    if t.schema_version != TRANSCRIPT_SCHEMA_VERSION {
        out.push(Violation::new(
            format!("unsupported schema_version {}", t.schema_version),
            0,
        ));
    }
    if !t.audio_duration_s.is_finite() || t.audio_duration_s < 0.0 {
        out.push(Violation::new("audio duration not a non-negative number", 0));
    }

    for (pos, w) in t.words.iter().enumerate() {
        if w.index != pos {
            out.push(Violation::new(
                format!("word index {} out of order", w.index),
                pos,
            ));
        }
        if w.text.is_empty() {
            out.push(Violation::new("empty word text", pos));
        } else if w.text.chars().any(char::is_whitespace) {
            out.push(Violation::new("word text contains whitespace", pos));
        }
        if w.speaker.trim().is_empty() {
            out.push(Violation::new("missing speaker label", pos));
        }
        if !(w.start_s.is_finite() && w.end_s.is_finite()) || w.start_s < 0.0 || w.end_s < w.start_s
        {
            out.push(Violation::new("word times not 0 <= start_s <= end_s", pos));
        }
    }
    if let Some(last) = t.words.last() {
        if last.end_s > t.audio_duration_s {
            out.push(Violation::new(
                "audio duration shorter than last word end",
                last.index,
            ));
        }
    }

    check_sentences(t, &mut out);
    check_turns(t, &mut out);
    out
}

fn check_sentences(t: &TranscriptArtifact, out: &mut Vec<Violation>) {
    let n_words = t.words.len();
    if t.sentences.is_empty() {
        if n_words > 0 {
            out.push(Violation::new("words not covered by any sentence", 0));
        }
        return;
    }
    if n_words == 0 {
        out.push(Violation::new("sentences present without words", 0));
        return;
    }
    let mut expected_first = 0;
    for (pos, s) in t.sentences.iter().enumerate() {
        if s.index != pos {
            out.push(Violation::new(
                format!("sentence index {} out of order", s.index),
                pos,
            ));
        }
        let r = s.word_range;
        if r.first() < expected_first && pos > 0 {
            out.push(Violation::new(
                format!("sentences {} and {} overlap in word range", pos - 1, pos),
                pos,
            ));
        } else if r.first() != expected_first {
            out.push(Violation::new(
                format!("gap in word coverage before sentence {pos}"),
                pos,
            ));
        }
        if r.last() >= n_words {
            out.push(Violation::new("sentence word range past last word", pos));
        } else {
            let joined = join_words(t.words[r.first()..=r.last()].iter().map(|w| &w.text));
            if joined != s.text {
                out.push(Violation::new("sentence text differs from joined words", pos));
            }
        }
        expected_first = expected_first.max(r.last() + 1);
    }
    if expected_first < n_words {
        out.push(Violation::new(
            "trailing words not covered by any sentence",
            t.sentences.len() - 1,
        ));
    }
}

fn check_turns(t: &TranscriptArtifact, out: &mut Vec<Violation>) {
    let n_sent = t.sentences.len();
    if t.turns.is_empty() {
        if n_sent > 0 {
            out.push(Violation::new("sentences not covered by any turn", 0));
        }
        return;
    }
    let mut expected_first = 0;
    for (pos, turn) in t.turns.iter().enumerate() {
        if turn.index != pos {
            out.push(Violation::new(
                format!("turn index {} out of order", turn.index),
                pos,
            ));
        }
        if turn.speaker.trim().is_empty() {
            out.push(Violation::new("missing speaker label on turn", pos));
        }
        if pos > 0 && t.turns[pos - 1].speaker == turn.speaker {
            out.push(Violation::new("adjacent turns same speaker", pos));
        }
        let r = turn.sentence_range;
        if r.first() < expected_first && pos > 0 {
            out.push(Violation::new(
                format!("turns {} and {} overlap in sentence range", pos - 1, pos),
                pos,
            ));
        } else if r.first() != expected_first {
            out.push(Violation::new(
                format!("gap in sentence coverage before turn {pos}"),
                pos,
            ));
        }
        if r.last() >= n_sent {
            out.push(Violation::new("turn sentence range past last sentence", pos));
        } else {
            let words = t.sentences[r.first()..=r.last()]
                .iter()
                .flat_map(|s| s.word_range.iter())
                .filter_map(|i| t.words.get(i));
            if words.into_iter().any(|w| w.speaker != turn.speaker) {
                out.push(Violation::new("word speaker differs from turn speaker", pos));
            }
        }
        expected_first = expected_first.max(r.last() + 1);
    }
    if expected_first < n_sent {
        out.push(Violation::new(
            "trailing sentences not covered by any turn",
            t.turns.len() - 1,
        ));
    }
}

/// A transcript whose invariants have been checked. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TranscriptArtifact", into = "TranscriptArtifact")]
pub struct Transcript {
    inner: TranscriptArtifact,
}

impl TryFrom<TranscriptArtifact> for Transcript {
    type Error = ModelError;

    fn try_from(inner: TranscriptArtifact) -> Result<Self, Self::Error> {
        let violations = validate_transcript(&inner);
        if !violations.is_empty() {
            return Err(ModelError::InvalidTranscript(violations));
        }
        Ok(Self { inner })
    }
}

impl From<Transcript> for TranscriptArtifact {
    fn from(t: Transcript) -> Self {
        t.inner
    }
}

impl Transcript {
    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let artifact: TranscriptArtifact = serde_json::from_str(json)?;
        Transcript::try_from(artifact)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("transcript serializes")
    }

    pub fn artifact(&self) -> &TranscriptArtifact {
        &self.inner
    }

    pub fn recording_id(&self) -> &str {
        &self.inner.recording_id
    }

    pub fn title(&self) -> &str {
        &self.inner.title
    }

    pub fn audio_duration_s(&self) -> f64 {
        self.inner.audio_duration_s
    }

    pub fn words(&self) -> &[WordToken] {
        &self.inner.words
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.inner.sentences
    }

    pub fn turns(&self) -> &[SpeakerTurn] {
        &self.inner.turns
    }

    /// Global word range covered by a turn.
    pub fn turn_word_range(&self, turn: usize) -> IndexRange {
        let r = self.inner.turns[turn].sentence_range;
        let first = self.inner.sentences[r.first()].word_range.first();
        let last = self.inner.sentences[r.last()].word_range.last();
        IndexRange::new(first, last).expect("validated")
    }

    pub fn turn_text(&self, turn: usize) -> String {
        self.sentences_text(self.inner.turns[turn].sentence_range)
    }

    /// Sentence texts of `range` joined with single spaces.
    pub fn sentences_text(&self, range: IndexRange) -> String {
        join_words(self.inner.sentences[range.first()..=range.last()].iter().map(|s| &s.text))
    }

    /// Sentence containing global word `word`.
    pub fn sentence_of_word(&self, word: usize) -> Option<usize> {
        let sentences = &self.inner.sentences;
        let pos = sentences.partition_point(|s| s.word_range.last() < word);
        (pos < sentences.len() && sentences[pos].word_range.contains(word)).then_some(pos)
    }

    pub fn turn_of_sentence(&self, sentence: usize) -> Option<usize> {
        let turns = &self.inner.turns;
        let pos = turns.partition_point(|t| t.sentence_range.last() < sentence);
        (pos < turns.len() && turns[pos].sentence_range.contains(sentence)).then_some(pos)
    }

    /// `[start_s of first word, end_s of last word]` for a sentence range.
    pub fn time_range_s(&self, sentences: IndexRange) -> [f64; 2] {
        let first = self.inner.sentences[sentences.first()].word_range.first();
        let last = self.inner.sentences[sentences.last()].word_range.last();
        [self.inner.words[first].start_s, self.inner.words[last].end_s]
    }
}

/// Builds well-formed transcripts from speaker turns of sentence strings,
/// assigning evenly paced word timings. Used for fixtures and by the
/// fake transcriber.
#[derive(Debug, Clone)]
pub struct TranscriptBuilder {
    recording_id: String,
    title: String,
    seconds_per_word: f64,
    turns: Vec<(String, Vec<String>)>,
}

impl TranscriptBuilder {
    pub fn new(recording_id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            recording_id: recording_id.into(),
            title: title.into(),
            seconds_per_word: 0.4,
            turns: Vec::new(),
        }
    }

    pub fn seconds_per_word(mut self, s: f64) -> Self {
        self.seconds_per_word = s;
        self
    }

    /// Appends a speaker turn. Consecutive calls with the same speaker are
    /// folded into one turn.
    pub fn turn<I, S>(mut self, speaker: &str, sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sentences: Vec<String> = sentences
            .into_iter()
            .map(Into::into)
            .filter(|s: &String| !s.trim().is_empty())
            .collect();
        if sentences.is_empty() {
            return self;
        }
        match self.turns.last_mut() {
            Some((last, existing)) if last == speaker => existing.extend(sentences),
            _ => self.turns.push((speaker.to_string(), sentences)),
        }
        self
    }

    pub fn build_artifact(self) -> TranscriptArtifact {
        let mut words = Vec::new();
        let mut sentences = Vec::new();
        let mut turns = Vec::new();
        for (speaker, sents) in self.turns {
            let first_sentence = sentences.len();
            for text in sents {
                let first_word = words.len();
                for tok in text.split_whitespace() {
                    let index = words.len();
                    let start_s = millis(index as f64 * self.seconds_per_word);
                    words.push(WordToken {
                        index,
                        text: tok.to_string(),
                        start_s,
                        end_s: millis(start_s + self.seconds_per_word * 0.9),
                        speaker: speaker.clone(),
                    });
                }
                let word_range = IndexRange::new(first_word, words.len() - 1).expect("non-empty");
                sentences.push(Sentence {
                    index: sentences.len(),
                    word_range,
                    text: join_words(text.split_whitespace()),
                });
            }
            turns.push(SpeakerTurn {
                index: turns.len(),
                speaker,
                sentence_range: IndexRange::new(first_sentence, sentences.len() - 1)
                    .expect("non-empty"),
            });
        }
        let audio_duration_s = millis(words.len() as f64 * self.seconds_per_word);
        TranscriptArtifact {
            schema_version: TRANSCRIPT_SCHEMA_VERSION,
            recording_id: self.recording_id,
            title: self.title,
            audio_duration_s,
            words,
            sentences,
            turns,
        }
    }

    pub fn build(self) -> Transcript {
        Transcript::try_from(self.build_artifact()).expect("builder output is valid")
    }
}

fn millis(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_turns() -> TranscriptArtifact {
        TranscriptBuilder::new("rec", "Two turns")
            .turn("A", ["Hello there friend.", "How are you?"])
            .turn("B", ["Fine thanks."])
            .build_artifact()
    }

    #[test]
    fn well_formed_has_no_violations() {
        assert!(validate_transcript(&two_turns()).is_empty());
    }

    #[test]
    fn same_speaker_adjacent_turns() {
        let mut t = two_turns();
        t.turns[1].speaker = "A".into();
        for w in &mut t.words {
            w.speaker = "A".into();
        }
        let v = validate_transcript(&t);
        let rendered: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(rendered, vec!["adjacent turns same speaker @1"]);
    }

    #[test]
    fn overlapping_sentences_named() {
        // bypass the builder: sentence 1 starts one word early
        let mut t = two_turns();
        let r = t.sentences[1].word_range;
        t.sentences[1].word_range = IndexRange::new(r.first() - 1, r.last()).unwrap();
        t.sentences[1].text = join_words(
            t.words[r.first() - 1..=r.last()].iter().map(|w| w.text.as_str()),
        );
        let v = validate_transcript(&t);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].index, 1);
        assert!(v[0].invariant.contains("sentences 0 and 1 overlap"));
    }

    #[test]
    fn missing_speaker_and_bad_times() {
        let mut t = two_turns();
        t.words[0].speaker = String::new();
        t.words[2].end_s = -1.0;
        let v = validate_transcript(&t);
        assert!(v.iter().any(|x| x.invariant == "missing speaker label" && x.index == 0));
        assert!(v.iter().any(|x| x.invariant.starts_with("word times") && x.index == 2));
    }

    #[test]
    fn short_duration() {
        let mut t = two_turns();
        t.audio_duration_s = 0.1;
        assert!(!validate_transcript(&t).is_empty());
    }

    #[test]
    fn json_roundtrip_validates() {
        let t = Transcript::try_from(two_turns()).unwrap();
        let back = Transcript::from_json(&t.to_json_pretty()).unwrap();
        assert_eq!(back, t);

        let mut broken = two_turns();
        broken.words[1].index = 7;
        let json = serde_json::to_string(&broken).unwrap();
        assert!(matches!(
            Transcript::from_json(&json),
            Err(ModelError::InvalidTranscript(_))
        ));
    }

    #[test]
    fn lookups() {
        let t = Transcript::try_from(two_turns()).unwrap();
        assert_eq!(t.sentence_of_word(0), Some(0));
        assert_eq!(t.sentence_of_word(3), Some(1));
        assert_eq!(t.sentence_of_word(99), None);
        assert_eq!(t.turn_of_sentence(2), Some(1));
        assert_eq!(t.turn_word_range(1), IndexRange::new(6, 7).unwrap());
        assert_eq!(t.turn_text(0), "Hello there friend. How are you?");
        let [a, b] = t.time_range_s(IndexRange::new(0, 0).unwrap());
        assert_eq!(a, 0.0);
        assert_eq!(b, 1.16);
    }

    #[test]
    fn empty_transcript_is_valid() {
        let t = TranscriptBuilder::new("e", "empty").build_artifact();
        assert!(validate_transcript(&t).is_empty());
    }
}
