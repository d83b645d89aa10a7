//! Inline coreference markup for fixtures: `⟨e1:the new policy⟩ … ⟨e1:it⟩`.
//!
//! Mentions may nest. Labels are free-form; mentions sharing a label form
//! one cluster. Stripping the markup yields the plain text, and each
//! mention maps to the whitespace tokens its characters touch.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Transcript, TranscriptBuilder};
use crate::text::join_words;

use super::fake::FakeCoref;

pub const OPEN: char = '⟨';
pub const CLOSE: char = '⟩';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkupError {
    #[error("unterminated label at char {0}")]
    UnterminatedLabel(usize),
    #[error("unclosed mention `{0}`")]
    Unclosed(String),
    #[error("stray closing bracket at char {0}")]
    StrayClose(usize),
    #[error("mention `{0}` covers no word")]
    EmptyMention(String),
}

/// Parsed markup: plain text plus token-index clusters in order of first
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Markup {
    pub text: String,
    pub clusters: Vec<(String, Vec<[usize; 2]>)>,
}

pub fn parse(marked: &str) -> Result<Markup, MarkupError> {
    let mut plain = String::new();
    let mut plain_chars = 0usize;
    // (label, char offset in plain text where the mention starts)
    let mut stack: Vec<(String, usize)> = Vec::new();
    let mut char_spans: Vec<(String, usize, usize)> = Vec::new();

    let chars: Vec<char> = marked.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == OPEN {
            let colon = chars[i + 1..]
                .iter()
                .position(|&c| c == ':')
                .ok_or(MarkupError::UnterminatedLabel(i))?;
            let label: String = chars[i + 1..i + 1 + colon].iter().collect();
            if label.chars().any(|c| c.is_whitespace() || c == OPEN || c == CLOSE) {
                return Err(MarkupError::UnterminatedLabel(i));
            }
            stack.push((label, plain_chars));
            i += colon + 2;
            continue;
        }
        if c == CLOSE {
            let (label, start) = stack.pop().ok_or(MarkupError::StrayClose(i))?;
            char_spans.push((label, start, plain_chars));
        } else {
            plain.push(c);
            plain_chars += 1;
        }
        i += 1;
    }
    if let Some((label, _)) = stack.pop() {
        return Err(MarkupError::Unclosed(label));
    }

    // char ranges of whitespace tokens
    let mut tokens: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, c) in plain.chars().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                tokens.push((s, pos));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push((s, plain_chars));
    }

    char_spans.sort_by_key(|(_, s, e)| (*s, std::cmp::Reverse(*e)));
    let mut order: Vec<String> = Vec::new();
    let mut by_label: HashMap<String, Vec<[usize; 2]>> = HashMap::new();
    for (label, s, e) in char_spans {
        let touched: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, (ts, te))| *ts < e && s < *te)
            .map(|(idx, _)| idx)
            .collect();
        let (Some(&first), Some(&last)) = (touched.first(), touched.last()) else {
            return Err(MarkupError::EmptyMention(label));
        };
        if !by_label.contains_key(&label) {
            order.push(label.clone());
        }
        by_label.entry(label).or_default().push([first, last]);
    }
    let clusters = order
        .into_iter()
        .map(|label| {
            let spans = by_label.remove(&label).expect("present");
            (label, spans)
        })
        .collect();

    Ok(Markup { text: join_words(plain.split_whitespace()), clusters })
}

/// Removes markup brackets and labels, keeping the mention text.
pub fn strip(marked: &str) -> Result<String, MarkupError> {
    parse(marked).map(|m| m.text)
}

/// Builds a transcript from marked-up speaker turns, together with a fake
/// coreference provider that knows each turn's markup.
pub fn marked_transcript<'a, I, S>(
    recording_id: &str,
    turns: I,
) -> Result<(Transcript, FakeCoref), MarkupError>
where
    I: IntoIterator<Item = (&'a str, S)>,
    S: IntoIterator<Item = &'a str>,
{
    let mut builder = TranscriptBuilder::new(recording_id, recording_id);
    let mut coref = FakeCoref::new();
    let mut pending: Option<(&str, Vec<&str>)> = None;
    let mut flush = |speaker: &str, sentences: Vec<&str>, builder: TranscriptBuilder| {
        let plain: Result<Vec<String>, _> = sentences.iter().map(|s| strip(s)).collect();
        coref.register(&sentences.join(" "))?;
        Ok::<_, MarkupError>(builder.turn(speaker, plain?))
    };
    for (speaker, sentences) in turns {
        let sentences: Vec<&str> = sentences.into_iter().collect();
        match pending.as_mut() {
            Some((s, acc)) if *s == speaker => acc.extend(sentences),
            _ => {
                if let Some((s, acc)) = pending.take() {
                    builder = flush(s, acc, builder)?;
                }
                pending = Some((speaker, sentences));
            }
        }
    }
    if let Some((s, acc)) = pending.take() {
        builder = flush(s, acc, builder)?;
    }
    Ok((builder.build(), coref))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_markup() {
        let m = parse("⟨e1:The dog⟩ barked. ⟨e1:It⟩ was loud.").unwrap();
        assert_eq!(m.text, "The dog barked. It was loud.");
        assert_eq!(m.clusters, vec![("e1".to_string(), vec![[0, 1], [3, 3]])]);
    }

    #[test]
    fn punctuation_attached_to_mention_token() {
        let m = parse("I saw ⟨a:her⟩.").unwrap();
        assert_eq!(m.text, "I saw her.");
        assert_eq!(m.clusters[0].1, vec![[2, 2]]);
    }

    #[test]
    fn nested_mentions() {
        let m = parse("⟨e1:⟨e2:her⟩ old dog⟩ ran to ⟨e2:her⟩").unwrap();
        assert_eq!(m.text, "her old dog ran to her");
        assert_eq!(
            m.clusters,
            vec![("e1".to_string(), vec![[0, 2]]), ("e2".to_string(), vec![[0, 0], [5, 5]])]
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("⟨e1:dog"), Err(MarkupError::Unclosed(_))));
        assert!(matches!(parse("dog⟩"), Err(MarkupError::StrayClose(3))));
        assert!(matches!(parse("⟨e1 dog⟩"), Err(MarkupError::UnterminatedLabel(0))));
        assert!(matches!(parse("a ⟨e1: ⟩ b"), Err(MarkupError::EmptyMention(_))));
    }

    #[test]
    fn no_markup_is_identity() {
        let m = parse("plain  words here").unwrap();
        assert_eq!(m.text, "plain words here");
        assert!(m.clusters.is_empty());
    }
}
