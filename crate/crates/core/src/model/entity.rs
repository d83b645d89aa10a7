use serde::{Deserialize, Serialize};

use super::range::IndexRange;
use crate::error::ModelError;

/// One mention of an entity, in transcript-global word coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start_word: usize,
    pub end_word: usize,
    pub sentence_span: IndexRange,
    /// Surface text of the mentioned words.
    pub text: String,
}

impl MentionSpan {
    pub fn word_range(&self) -> IndexRange {
        IndexRange::new(self.start_word, self.end_word).expect("checked on construction")
    }
}

/// A coreference chain. `span_words` and `mention_count` are derived from
/// the mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EntityClusterRepr", into = "EntityClusterRepr")]
pub struct EntityCluster {
    id: usize,
    mentions: Vec<MentionSpan>,
}

#[derive(Serialize, Deserialize)]
struct EntityClusterRepr {
    id: usize,
    mentions: Vec<MentionSpan>,
    span_words: usize,
    mention_count: usize,
}

impl EntityCluster {
    /// Sorts mentions by start word and checks each one.
    pub fn new(id: usize, mut mentions: Vec<MentionSpan>) -> Result<Self, ModelError> {
        if mentions.is_empty() {
            return Err(ModelError::InvalidEntity { id, reason: "no mentions".into() });
        }
        for m in &mentions {
            if m.start_word > m.end_word {
                return Err(ModelError::InvalidEntity {
                    id,
                    reason: format!("mention {}..{} reversed", m.start_word, m.end_word),
                });
            }
        }
        mentions.sort_by_key(|m| (m.start_word, m.end_word));
        Ok(Self { id, mentions })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn mentions(&self) -> &[MentionSpan] {
        &self.mentions
    }

    pub fn mention_count(&self) -> usize {
        self.mentions.len()
    }

    /// First mention start to furthest mention end.
    pub fn word_span(&self) -> IndexRange {
        let first = self.mentions[0].start_word;
        let last = self.mentions.iter().map(|m| m.end_word).max().expect("non-empty");
        IndexRange::new(first, last).expect("sorted")
    }

    /// Width of the whole chain in words.
    pub fn span_words(&self) -> usize {
        self.word_span().len()
    }

    /// Sentences from the first mention's sentence to the furthest mention's.
    pub fn sentence_span(&self) -> IndexRange {
        let first = self.mentions.iter().map(|m| m.sentence_span.first()).min().expect("non-empty");
        let last = self.mentions.iter().map(|m| m.sentence_span.last()).max().expect("non-empty");
        IndexRange::new(first, last).expect("ordered")
    }
}

impl From<EntityCluster> for EntityClusterRepr {
    fn from(c: EntityCluster) -> Self {
        Self {
            span_words: c.span_words(),
            mention_count: c.mention_count(),
            id: c.id,
            mentions: c.mentions,
        }
    }
}

impl TryFrom<EntityClusterRepr> for EntityCluster {
    type Error = ModelError;

    fn try_from(r: EntityClusterRepr) -> Result<Self, Self::Error> {
        let c = EntityCluster::new(r.id, r.mentions)?;
        if c.span_words() != r.span_words || c.mention_count() != r.mention_count {
            return Err(ModelError::InvalidEntity {
                id: r.id,
                reason: "stored span_words/mention_count disagree with mentions".into(),
            });
        }
        Ok(c)
    }
}

/// Coreference output for one speaker turn, already in global coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefAnnotation {
    pub turn_index: usize,
    pub clusters: Vec<EntityCluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChunkKind {
    EntityGrouped,
    Singleton,
}

/// Contiguous sentences of one speaker turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticChunk {
    pub id: usize,
    pub turn_index: usize,
    pub sentence_range: IndexRange,
    pub kind: ChunkKind,
    pub text: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mention(start: usize, end: usize, sentence: usize) -> MentionSpan {
        MentionSpan {
            start_word: start,
            end_word: end,
            sentence_span: IndexRange::single(sentence),
            text: "it".into(),
        }
    }

    #[test]
    fn derived_fields() {
        let c = EntityCluster::new(4, vec![mention(30, 31, 3), mention(2, 2, 0), mention(10, 12, 1)])
            .unwrap();
        assert_eq!(c.mentions()[0].start_word, 2);
        assert_eq!(c.span_words(), 30);
        assert_eq!(c.mention_count(), 3);
        assert_eq!(c.sentence_span(), IndexRange::new(0, 3).unwrap());
    }

    #[test]
    fn serde_rejects_inconsistent_derived_fields() {
        let c = EntityCluster::new(1, vec![mention(0, 1, 0), mention(5, 5, 1)]).unwrap();
        let mut v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["span_words"], 6);
        assert_eq!(serde_json::from_value::<EntityCluster>(v.clone()).unwrap(), c);
        v["mention_count"] = 9.into();
        assert!(serde_json::from_value::<EntityCluster>(v).is_err());
    }

    #[test]
    fn rejects_empty_and_reversed() {
        assert!(EntityCluster::new(0, vec![]).is_err());
        let mut m = mention(0, 0, 0);
        m.start_word = 3;
        assert!(EntityCluster::new(0, vec![m]).is_err());
    }
}
