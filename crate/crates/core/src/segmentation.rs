//! Splitting transcripts into summarizable segments.
//!
//! Two strategies: fixed-length word windows over the whole transcript, and
//! coreference chunking, which groups the sentences of a speaker turn that
//! are spanned by the same entity chain. Chunking never crosses a turn
//! boundary.

use serde::Serialize;

use crate::error::SegmentationError;
use crate::model::{
    ChunkKind, CorefAnnotation, EntityCluster, IndexRange, PipelineConfig, SemanticChunk,
    Transcript,
};
use crate::providers::fake::normalize_token;
use crate::providers::{bounded_map, resolve_coreferences, CorefResolver};
use crate::text::join_words;

/// Consecutive runs of `limit` items; the last run may be shorter.
///
/// # Panics
/// If `limit` is zero.
pub fn naive_fixed_segment<T>(words: &[T], limit: usize) -> Vec<&[T]> {
    assert!(limit >= 1, "segment limit must be positive");
    words.chunks(limit).collect()
}

/// A fixed-length window over the transcript's words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NaiveSegment {
    pub id: usize,
    pub word_range: IndexRange,
    pub text: String,
}

pub fn naive_transcript_segments(t: &Transcript, limit: usize) -> Vec<NaiveSegment> {
    let mut first = 0;
    naive_fixed_segment(t.words(), limit)
        .into_iter()
        .enumerate()
        .map(|(id, seg)| {
            let range = IndexRange::new(first, first + seg.len() - 1).expect("non-empty chunk");
            first += seg.len();
            NaiveSegment { id, word_range: range, text: join_words(seg.iter().map(|w| &w.text)) }
        })
        .collect()
}

/// Which rule removed each dropped entity. Every input cluster appears in
/// exactly one list; a cluster breaking several rules is filed under the
/// first of stop list, span, mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EntityFilterReport {
    pub kept: Vec<usize>,
    pub dropped_span: Vec<usize>,
    pub dropped_mentions: Vec<usize>,
    pub dropped_stoplist: Vec<usize>,
}

impl EntityFilterReport {
    pub fn total(&self) -> usize {
        self.kept.len()
            + self.dropped_span.len()
            + self.dropped_mentions.len()
            + self.dropped_stoplist.len()
    }
}

fn is_stoplisted(c: &EntityCluster, stop: &[String]) -> bool {
    c.mentions().iter().all(|m| {
        let surface = normalize_token(m.text.trim());
        stop.iter().any(|s| s.to_lowercase() == surface)
    })
}

/// Drops entities wider than `m_max_span_words`, with fewer than
/// `p_min_mentions` mentions, or made only of stop-token mentions.
pub fn filter_entities(clusters: &[EntityCluster], config: &PipelineConfig) -> EntityFilterReport {
    let mut report = EntityFilterReport::default();
    for c in clusters {
        let bucket = if is_stoplisted(c, &config.stop_tokens) {
            &mut report.dropped_stoplist
        } else if c.span_words() > config.m_max_span_words {
            &mut report.dropped_span
        } else if c.mention_count() < config.p_min_mentions {
            &mut report.dropped_mentions
        } else {
            &mut report.kept
        };
        bucket.push(c.id());
    }
    report
}

/// Partitions `turn` into chunks. Overlapping entity intervals (sharing at
/// least one sentence) merge into one `ENTITY_GROUPED` chunk; sentences
/// outside every interval become `SINGLETON` chunks. Intervals are clipped
/// to the turn first.
pub fn chunk_ranges(turn: IndexRange, intervals: &[IndexRange]) -> Vec<(IndexRange, ChunkKind)> {
    let mut clipped: Vec<IndexRange> = intervals.iter().filter_map(|r| r.clip(&turn)).collect();
    clipped.sort();

    let mut merged: Vec<IndexRange> = Vec::new();
    for r in clipped {
        match merged.last_mut() {
            Some(last) if r.first() <= last.last() => *last = last.hull(&r),
            _ => merged.push(r),
        }
    }

    let mut out = Vec::new();
    let mut next = turn.first();
    for r in merged {
        for s in next..r.first() {
            out.push((IndexRange::single(s), ChunkKind::Singleton));
        }
        out.push((r, ChunkKind::EntityGrouped));
        next = r.last() + 1;
    }
    for s in next..=turn.last() {
        out.push((IndexRange::single(s), ChunkKind::Singleton));
    }
    out
}

/// Chunks one turn using the annotation's clusters, which must already be
/// filtered. Chunk ids start at `first_id`.
pub fn segment_turn(
    transcript: &Transcript,
    annotation: &CorefAnnotation,
    first_id: usize,
) -> Vec<SemanticChunk> {
    let turn = transcript.turns()[annotation.turn_index].sentence_range;
    let intervals: Vec<IndexRange> =
        annotation.clusters.iter().map(EntityCluster::sentence_span).collect();
    chunk_ranges(turn, &intervals)
        .into_iter()
        .enumerate()
        .map(|(i, (range, kind))| SemanticChunk {
            id: first_id + i,
            turn_index: annotation.turn_index,
            sentence_range: range,
            kind,
            text: transcript.sentences_text(range),
        })
        .collect()
}

/// Per-turn record of what the segmenter saw and produced.
#[derive(Debug, Clone, Serialize)]
pub struct TurnReport {
    pub turn_index: usize,
    pub filter: EntityFilterReport,
    pub clusters: Vec<EntityCluster>,
    pub chunk_ranges: Vec<IndexRange>,
}

/// Chunks every turn, calling the coreference provider for up to
/// `parallelism` turns at once. Output order and ids match sequential
/// execution.
pub fn segment_transcript(
    transcript: &Transcript,
    coref: &dyn CorefResolver,
    config: &PipelineConfig,
    parallelism: usize,
) -> Result<Vec<SemanticChunk>, SegmentationError> {
    segment_transcript_with_report(transcript, coref, config, parallelism).map(|(c, _)| c)
}

pub fn segment_transcript_with_report(
    transcript: &Transcript,
    coref: &dyn CorefResolver,
    config: &PipelineConfig,
    parallelism: usize,
) -> Result<(Vec<SemanticChunk>, Vec<TurnReport>), SegmentationError> {
    let turns: Vec<usize> = (0..transcript.turns().len()).collect();
    let annotated = bounded_map(&turns, parallelism, |&turn| {
        resolve_coreferences(transcript, turn, coref)
            .map_err(|source| SegmentationError::Provider { turn, source })
    });

    let mut chunks = Vec::new();
    let mut reports = Vec::new();
    for ann in annotated {
        let ann = ann?;
        let filter = filter_entities(&ann.clusters, config);
        let kept = CorefAnnotation {
            turn_index: ann.turn_index,
            clusters: ann
                .clusters
                .iter()
                .filter(|c| filter.kept.contains(&c.id()))
                .cloned()
                .collect(),
        };
        let turn_chunks = segment_turn(transcript, &kept, chunks.len());
        reports.push(TurnReport {
            turn_index: ann.turn_index,
            filter,
            clusters: ann.clusters,
            chunk_ranges: turn_chunks.iter().map(|c| c.sentence_range).collect(),
        });
        chunks.extend(turn_chunks);
    }
    Ok((chunks, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MentionSpan;

    fn r(a: usize, b: usize) -> IndexRange {
        IndexRange::new(a, b).unwrap()
    }

    #[test]
    fn naive_lengths() {
        let words: Vec<u32> = (0..154).collect();
        let lens: Vec<usize> = naive_fixed_segment(&words, 60).iter().map(|s| s.len()).collect();
        assert_eq!(lens, vec![60, 60, 34]);
        assert!(naive_fixed_segment::<u32>(&[], 60).is_empty());
        let exact: Vec<u32> = (0..60).collect();
        assert_eq!(naive_fixed_segment(&exact, 60).len(), 1);
    }

    #[test]
    #[should_panic]
    fn naive_zero_limit() {
        naive_fixed_segment(&[1, 2], 0);
    }

    fn cluster(id: usize, mentions: &[(usize, usize, &str)]) -> EntityCluster {
        // one sentence per 10 words
        let ms = mentions
            .iter()
            .map(|&(s, e, text)| MentionSpan {
                start_word: s,
                end_word: e,
                sentence_span: r(s / 10, e / 10),
                text: text.into(),
            })
            .collect();
        EntityCluster::new(id, ms).unwrap()
    }

    #[test]
    fn filter_rules() {
        let cfg = PipelineConfig::default();
        let two_mentions = cluster(0, &[(0, 0, "Ann"), (39, 39, "she")]);
        let stop_only = cluster(1, &[(1, 1, "I"), (5, 5, "I"), (9, 9, "i"), (12, 12, "me.")]);
        let too_wide = cluster(
            2,
            &[(0, 0, "x"), (40, 40, "x"), (80, 80, "x"), (120, 120, "x"), (149, 149, "x")],
        );
        let good = cluster(3, &[(2, 3, "the dog"), (7, 7, "it"), (30, 30, "it")]);
        let mixed = cluster(4, &[(1, 1, "I"), (3, 3, "me"), (8, 8, "Bob")]);
        let report = filter_entities(&[two_mentions, stop_only, too_wide, good, mixed], &cfg);
        assert_eq!(report.dropped_mentions, vec![0]);
        assert_eq!(report.dropped_stoplist, vec![1]);
        assert_eq!(report.dropped_span, vec![2]);
        assert_eq!(report.kept, vec![3, 4]);
        assert_eq!(report.total(), 5);
    }

    #[test]
    fn span_boundary_is_inclusive() {
        let cfg = PipelineConfig::default();
        let exactly_100 = cluster(0, &[(0, 0, "a"), (50, 50, "a"), (99, 99, "a")]);
        let width_101 = cluster(1, &[(0, 0, "a"), (50, 50, "a"), (100, 100, "a")]);
        let rep = filter_entities(&[exactly_100, width_101], &cfg);
        assert_eq!(rep.kept, vec![0]);
        assert_eq!(rep.dropped_span, vec![1]);
    }

    #[test]
    fn chunking_merges_overlaps_only() {
        let chunks = chunk_ranges(r(0, 6), &[r(0, 1), r(1, 1), r(3, 4), r(4, 4)]);
        assert_eq!(
            chunks,
            vec![
                (r(0, 1), ChunkKind::EntityGrouped),
                (r(2, 2), ChunkKind::Singleton),
                (r(3, 4), ChunkKind::EntityGrouped),
                (r(5, 5), ChunkKind::Singleton),
                (r(6, 6), ChunkKind::Singleton),
            ]
        );
        // adjacent but not overlapping intervals stay apart
        let chunks = chunk_ranges(r(0, 3), &[r(0, 1), r(2, 3)]);
        assert_eq!(chunks.len(), 2);
    }

    #[test]
    fn chunking_clips_to_turn() {
        let chunks = chunk_ranges(r(5, 8), &[r(2, 6), r(8, 12)]);
        assert_eq!(
            chunks,
            vec![
                (r(5, 6), ChunkKind::EntityGrouped),
                (r(7, 7), ChunkKind::Singleton),
                (r(8, 8), ChunkKind::EntityGrouped),
            ]
        );
    }

    #[test]
    fn empty_annotation_gives_singletons() {
        let chunks = chunk_ranges(r(3, 5), &[]);
        assert!(chunks.iter().all(|(_, k)| *k == ChunkKind::Singleton));
        assert_eq!(chunks.len(), 3);
    }
}
