use serde::Serialize;

use super::cluster::ClusterAssignment;
use crate::error::BuildError;
use crate::model::{IndexRange, SummaryNode};
use crate::text::{join_words, word_count};

/// Concatenation of consecutive same-cluster summaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergedText {
    pub text: String,
    pub source_ids: Vec<String>,
    /// Member texts in order, kept so the summarizer can window them.
    pub parts: Vec<String>,
    pub transcript_span: IndexRange,
}

impl MergedText {
    pub fn word_count(&self) -> usize {
        word_count(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeOutcome {
    pub kept: Vec<MergedText>,
    pub stemmed: Vec<MergedText>,
}

/// Groups nodes into maximal runs of consecutive same-label nodes (in
/// transcript order), joins each run with single spaces, and drops runs of
/// `stem_cutoff_words` words or fewer.
///
/// A cluster whose members are interleaved with another cluster's yields
/// one run per contiguous stretch, so merged spans never overlap. Output is
/// in transcript order. Fails with [`BuildError::AllStemmed`] when nothing
/// survives.
pub fn merge_and_stem(
    nodes: &[SummaryNode],
    assignment: &ClusterAssignment,
    stem_cutoff_words: usize,
) -> Result<MergeOutcome, BuildError> {
    let groups = merge_runs(nodes, assignment)?;
    let (kept, stemmed): (Vec<_>, Vec<_>) =
        groups.into_iter().partition(|g| g.word_count() > stem_cutoff_words);
    if kept.is_empty() {
        return Err(BuildError::AllStemmed);
    }
    Ok(MergeOutcome { kept, stemmed })
}

/// Runs without the cutoff applied.
pub fn merge_runs(
    nodes: &[SummaryNode],
    assignment: &ClusterAssignment,
) -> Result<Vec<MergedText>, BuildError> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&i| (nodes[i].transcript_span.first(), i));

    let mut runs: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in order {
        let label = assignment
            .label_of(&nodes[i].id)
            .ok_or_else(|| BuildError::Assignment(format!("node {} has no label", nodes[i].id)))?;
        match runs.last_mut() {
            Some((l, members)) if *l == label => members.push(i),
            _ => runs.push((label, vec![i])),
        }
    }

    Ok(runs
        .into_iter()
        .map(|(_, members)| {
            let parts: Vec<String> = members.iter().map(|&i| nodes[i].text.clone()).collect();
            let span = members
                .iter()
                .map(|&i| nodes[i].transcript_span)
                .reduce(|a, b| a.hull(&b))
                .expect("non-empty run");
            MergedText {
                text: join_words(&parts),
                source_ids: members.iter().map(|&i| nodes[i].id.clone()).collect(),
                parts,
                transcript_span: span,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Level;

    fn node(ordinal: usize, text: &str, sentence: usize) -> SummaryNode {
        SummaryNode {
            id: Level::Long.node_id(ordinal),
            level: Level::Long,
            text: text.into(),
            word_count: word_count(text),
            source_ids: vec![],
            transcript_span: IndexRange::single(sentence),
            turn_range: IndexRange::single(0),
            time_range_s: [0.0, 0.0],
            degraded: false,
        }
    }

    fn assign(nodes: &[SummaryNode], labels: &[usize]) -> ClusterAssignment {
        ClusterAssignment {
            item_ids: nodes.iter().map(|n| n.id.clone()).collect(),
            labels: labels.to_vec(),
            within_turn: true,
        }
    }

    #[test]
    fn short_merge_is_stemmed() {
        let nodes = vec![
            node(0, "yeah", 0),
            node(1, "so anyway", 1),
            node(2, "the budget grew by ten percent", 2),
        ];
        let out = merge_and_stem(&nodes, &assign(&nodes, &[0, 0, 1]), 5).unwrap();
        assert_eq!(out.stemmed.len(), 1);
        assert_eq!(out.stemmed[0].text, "yeah so anyway");
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn six_words_survive() {
        let nodes = vec![node(0, "one two three four five six", 0)];
        let out = merge_and_stem(&nodes, &assign(&nodes, &[0]), 5).unwrap();
        assert_eq!(out.kept[0].text, "one two three four five six");
        assert_eq!(out.kept[0].source_ids, vec!["L-000"]);
    }

    #[test]
    fn all_stemmed() {
        let nodes = vec![node(0, "uh", 0), node(1, "right", 1)];
        assert_eq!(
            merge_and_stem(&nodes, &assign(&nodes, &[0, 1]), 5),
            Err(BuildError::AllStemmed)
        );
    }

    #[test]
    fn runs_follow_transcript_order() {
        // nodes listed out of order; labels 1 = sentences 0-1, 0 = sentences 2-3
        let nodes = vec![
            node(2, "c c c c c c", 2),
            node(0, "a a a a a a", 0),
            node(3, "d d d d d d", 3),
            node(1, "b b b b b b", 1),
        ];
        let out = merge_runs(&nodes, &assign(&nodes, &[0, 1, 0, 1])).unwrap();
        let ids: Vec<Vec<String>> = out.iter().map(|m| m.source_ids.clone()).collect();
        assert_eq!(ids, vec![vec!["L-000", "L-001"], vec!["L-002", "L-003"]]);
        assert_eq!(out[0].transcript_span, IndexRange::new(0, 1).unwrap());
    }

    #[test]
    fn interleaved_cluster_splits_into_runs() {
        let nodes = vec![
            node(0, "a a a a a a", 0),
            node(1, "b b b b b b", 1),
            node(2, "c c c c c c", 2),
        ];
        let out = merge_runs(&nodes, &assign(&nodes, &[0, 1, 0])).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.windows(2).all(|w| w[0].transcript_span.last() < w[1].transcript_span.first()));
    }

    #[test]
    fn missing_label() {
        let nodes = vec![node(0, "a", 0)];
        let a = ClusterAssignment { item_ids: vec![], labels: vec![], within_turn: false };
        assert!(matches!(merge_runs(&nodes, &a), Err(BuildError::Assignment(_))));
    }
}
