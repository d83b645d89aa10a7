use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::range::IndexRange;
use super::transcript::Transcript;
use crate::error::ModelError;
use crate::text::word_count;

pub const HIERARCHY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Level {
    Long,
    Medium,
    Short,
}

impl Level {
    pub fn prefix(self) -> &'static str {
        match self {
            Level::Long => "L",
            Level::Medium => "M",
            Level::Short => "S",
        }
    }

    /// Level whose nodes are the children of this level's nodes.
    pub fn child_level(self) -> Option<Level> {
        match self {
            Level::Long => None,
            Level::Medium => Some(Level::Long),
            Level::Short => Some(Level::Medium),
        }
    }

    pub fn node_id(self, ordinal: usize) -> String {
        format!("{}-{:03}", self.prefix(), ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryNode {
    pub id: String,
    pub level: Level,
    pub text: String,
    pub word_count: usize,
    /// Chunk ids for LONG nodes, child node ids otherwise.
    pub source_ids: Vec<String>,
    pub transcript_span: IndexRange,
    /// Speaker turns covered by the span.
    pub turn_range: IndexRange,
    pub time_range_s: [f64; 2],
    /// Set when a provider failure forced a fallback to unsummarized text.
    #[serde(default)]
    pub degraded: bool,
}

impl SummaryNode {
    pub fn new(
        level: Level,
        ordinal: usize,
        text: String,
        source_ids: Vec<String>,
        transcript_span: IndexRange,
        transcript: &Transcript,
    ) -> Self {
        let first_turn = transcript.turn_of_sentence(transcript_span.first()).expect("in range");
        let last_turn = transcript.turn_of_sentence(transcript_span.last()).expect("in range");
        Self {
            id: level.node_id(ordinal),
            level,
            word_count: word_count(&text),
            text,
            source_ids,
            transcript_span,
            turn_range: IndexRange::new(first_turn, last_turn).expect("ordered"),
            time_range_s: transcript.time_range_s(transcript_span),
            degraded: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub parent: String,
    pub child: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HighlightLevel {
    Short,
    Medium,
    Long,
    Transcript,
}

/// Where a key phrase occurs. Offsets are in Unicode scalar values,
/// half-open, into the node text (or, for `TRANSCRIPT`, into the sentence
/// texts of the short node's span joined with single spaces).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightTarget {
    pub level: HighlightLevel,
    pub node_id: Option<String>,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightLink {
    pub short_node_id: String,
    /// Case-folded phrase; empty when no shared n-gram exists.
    pub phrase: String,
    pub targets: Vec<HighlightTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub short_node_id: String,
    pub start_fraction: f64,
    pub end_fraction: f64,
}

/// Merged text discarded by the stem cutoff while building `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropLedgerEntry {
    pub level: Level,
    pub source_ids: Vec<String>,
    pub transcript_span: IndexRange,
    pub text: String,
    pub word_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub schema_version: u32,
    pub recording_id: String,
    pub audio_duration_s: f64,
    pub config: PipelineConfig,
    /// LONG nodes, then MEDIUM, then SHORT; transcript order within a level.
    pub nodes: Vec<SummaryNode>,
    pub edges: Vec<Edge>,
    pub highlights: Vec<HighlightLink>,
    pub timeline: Vec<TimelineEntry>,
    pub drop_ledger: Vec<DropLedgerEntry>,
}

impl Hierarchy {
    pub fn level_nodes(&self, level: Level) -> impl Iterator<Item = &SummaryNode> {
        self.nodes.iter().filter(move |n| n.level == level)
    }

    pub fn level_count(&self, level: Level) -> usize {
        self.level_nodes(level).count()
    }

    pub fn node(&self, id: &str) -> Option<&SummaryNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn children<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a SummaryNode> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.parent == id)
            .filter_map(move |e| self.node(&e.child))
    }

    /// Serialized artifact. Field order and float formatting are stable, so
    /// equal hierarchies produce equal bytes.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("hierarchy serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ModelError> {
        let h: Hierarchy = serde_json::from_slice(bytes)?;
        if h.schema_version != HIERARCHY_SCHEMA_VERSION {
            return Err(ModelError::InvalidHierarchy(vec![format!(
                "unsupported schema_version {}",
                h.schema_version
            )]));
        }
        Ok(h)
    }
}

/// Checks structural hierarchy invariants against the transcript it was
/// built from. Returns one message per violation.
pub fn validate_hierarchy(h: &Hierarchy, transcript: &Transcript) -> Vec<String> {
    let mut out = Vec::new();
    let by_id: HashMap<&str, &SummaryNode> = h.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    if by_id.len() != h.nodes.len() {
        out.push("duplicate node ids".to_string());
    }

    let counts = [Level::Long, Level::Medium, Level::Short].map(|l| h.level_count(l));
    if !(counts[2] <= counts[1] && counts[1] <= counts[0]) {
        out.push(format!("level counts not monotone: {counts:?}"));
    }

    let mut children: HashMap<&str, Vec<&SummaryNode>> = HashMap::new();
    let mut has_parent: HashSet<&str> = HashSet::new();
    for e in &h.edges {
        match (by_id.get(e.parent.as_str()), by_id.get(e.child.as_str())) {
            (Some(p), Some(c)) => {
                if p.level.child_level() != Some(c.level) {
                    out.push(format!("edge {} -> {} skips or inverts levels", p.id, c.id));
                }
                if !has_parent.insert(c.id.as_str()) {
                    out.push(format!("node {} has more than one parent", c.id));
                }
                children.entry(p.id.as_str()).or_default().push(c);
            }
            _ => out.push(format!("edge {} -> {} references unknown node", e.parent, e.child)),
        }
    }

    for level in [Level::Long, Level::Medium, Level::Short] {
        let mut prev: Option<&SummaryNode> = None;
        for n in h.level_nodes(level) {
            if n.word_count != word_count(&n.text) {
                out.push(format!("{}: word_count {} disagrees with text", n.id, n.word_count));
            }
            if n.transcript_span.last() >= transcript.sentences().len() {
                out.push(format!("{}: span past end of transcript", n.id));
                continue;
            }
            let expected = transcript.time_range_s(n.transcript_span);
            if n.time_range_s != expected {
                out.push(format!("{}: time range {:?} != {:?}", n.id, n.time_range_s, expected));
            }
            if let Some(p) = prev {
                if p.transcript_span.last() >= n.transcript_span.first() {
                    out.push(format!("{} and {} spans overlap or are unsorted", p.id, n.id));
                }
            }
            prev = Some(n);

            if level != Level::Long {
                let kids = children.get(n.id.as_str()).cloned().unwrap_or_default();
                if kids.is_empty() {
                    out.push(format!("{} has no children", n.id));
                    continue;
                }
                let kid_ids: Vec<&str> = kids.iter().map(|k| k.id.as_str()).collect();
                let src: Vec<&str> = n.source_ids.iter().map(String::as_str).collect();
                if kid_ids != src {
                    out.push(format!("{}: source_ids disagree with edges", n.id));
                }
                let hull = kids
                    .iter()
                    .map(|k| k.transcript_span)
                    .reduce(|a, b| a.hull(&b))
                    .expect("non-empty");
                if hull != n.transcript_span {
                    out.push(format!("{}: span {} != children hull {}", n.id, n.transcript_span, hull));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_ids() {
        assert_eq!(Level::Short.node_id(3), "S-003");
        assert_eq!(Level::Long.node_id(1234), "L-1234");
        assert_eq!(Level::Short.child_level(), Some(Level::Medium));
    }
}
