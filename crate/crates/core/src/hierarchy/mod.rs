//! Builds the LONG → MEDIUM → SHORT summary hierarchy.
//!
//! Chunks are summarized into LONG nodes. Each further level embeds the
//! level below, clusters it (within speaker turns for MEDIUM, across the
//! whole recording for SHORT), concatenates consecutive same-cluster
//! summaries, discards merges at or under the stem cutoff, and summarizes
//! what is left.

mod align;
mod cluster;
mod merge;
mod summarize;

pub use align::{align_key_phrase, timeline, MIN_PHRASE_WORDS};
pub use cluster::{
    agglomerate, build_distance_matrix, cluster_embedded, cluster_summaries, ClusterAssignment,
};
pub use merge::{merge_and_stem, merge_runs, MergeOutcome, MergedText};
pub use summarize::{pack_windows, summarize_chunk, summarize_units, window_budgets};

use crate::error::BuildError;
use crate::model::{
    validate_hierarchy, DropLedgerEntry, Edge, Hierarchy, Level, PipelineConfig, SemanticChunk,
    SummaryNode, Transcript, HIERARCHY_SCHEMA_VERSION,
};
use crate::providers::{bounded_map, Providers};
use crate::segmentation::segment_transcript;

/// Nodes and bookkeeping produced by one level of merging.
#[derive(Debug, Clone)]
pub struct LevelOutput {
    pub nodes: Vec<SummaryNode>,
    pub edges: Vec<Edge>,
    pub dropped: Vec<DropLedgerEntry>,
    pub assignment: ClusterAssignment,
}

/// Builds MEDIUM nodes from LONG nodes, or SHORT from MEDIUM.
///
/// When every merge falls under the stem cutoff the level keeps all
/// merges instead of coming out empty.
pub fn build_level(
    lower: &[SummaryNode],
    level: Level,
    transcript: &Transcript,
    providers: &Providers,
    config: &PipelineConfig,
) -> Result<LevelOutput, BuildError> {
    let Some(child_level) = level.child_level() else {
        return Err(BuildError::Assignment("LONG nodes are built from chunks".into()));
    };
    if lower.is_empty() {
        return Err(BuildError::EmptyLevel);
    }
    if lower.iter().any(|n| n.level != child_level) {
        return Err(BuildError::Assignment(format!("{level:?} must be built from {child_level:?}")));
    }

    let within_turn = level == Level::Medium;
    let assignment = cluster_summaries(
        lower,
        providers.embedder.as_ref(),
        within_turn,
        config.cluster_linkage,
        config.cluster_distance_threshold,
        providers.parallelism,
    )?;

    let (kept, stemmed) = match merge_and_stem(lower, &assignment, config.stem_cutoff_words) {
        Ok(out) => (out.kept, out.stemmed),
        Err(BuildError::AllStemmed) => {
            log::warn!("every {level:?} merge is at or under the stem cutoff; keeping all");
            (merge_runs(lower, &assignment)?, Vec::new())
        }
        Err(e) => return Err(e),
    };

    let summaries = bounded_map(&kept, providers.parallelism, |m| {
        summarize::summarize_or_fallback(&m.parts, providers.summarizer.as_ref(), config)
    });

    let mut nodes = Vec::with_capacity(kept.len());
    let mut edges = Vec::new();
    for (ordinal, (merged, (text, degraded))) in kept.iter().zip(summaries).enumerate() {
        let mut node = SummaryNode::new(
            level,
            ordinal,
            text,
            merged.source_ids.clone(),
            merged.transcript_span,
            transcript,
        );
        node.degraded = degraded;
        edges.extend(
            merged.source_ids.iter().map(|c| Edge { parent: node.id.clone(), child: c.clone() }),
        );
        nodes.push(node);
    }

    let dropped = stemmed
        .into_iter()
        .map(|m| DropLedgerEntry {
            level,
            word_count: m.word_count(),
            source_ids: m.source_ids,
            transcript_span: m.transcript_span,
            text: m.text,
        })
        .collect();

    Ok(LevelOutput { nodes, edges, dropped, assignment })
}

/// LONG nodes for every chunk, summarized concurrently.
pub fn build_long_level(
    chunks: &[SemanticChunk],
    transcript: &Transcript,
    providers: &Providers,
    config: &PipelineConfig,
) -> Vec<SummaryNode> {
    let indexed: Vec<(usize, &SemanticChunk)> = chunks.iter().enumerate().collect();
    bounded_map(&indexed, providers.parallelism, |(ordinal, chunk)| {
        summarize_chunk(chunk, *ordinal, transcript, providers.summarizer.as_ref(), config)
    })
}

/// Full pipeline: segment, then build every level.
pub fn build_hierarchy(
    transcript: &Transcript,
    providers: &Providers,
    config: &PipelineConfig,
) -> Result<Hierarchy, BuildError> {
    config.validate()?;
    let chunks =
        segment_transcript(transcript, providers.coref.as_ref(), config, providers.parallelism)?;
    build_hierarchy_from_chunks(transcript, &chunks, providers, config)
}

/// Summary levels for already-segmented chunks.
pub fn build_hierarchy_from_chunks(
    transcript: &Transcript,
    chunks: &[SemanticChunk],
    providers: &Providers,
    config: &PipelineConfig,
) -> Result<Hierarchy, BuildError> {
    config.validate()?;
    if chunks.is_empty() {
        return Err(BuildError::NoChunks);
    }
    let long = build_long_level(chunks, transcript, providers, config);
    let medium = build_level(&long, Level::Medium, transcript, providers, config)?;
    let short = build_level(&medium.nodes, Level::Short, transcript, providers, config)?;

    let mut h = Hierarchy {
        schema_version: HIERARCHY_SCHEMA_VERSION,
        recording_id: transcript.recording_id().to_string(),
        audio_duration_s: transcript.audio_duration_s(),
        config: config.clone(),
        nodes: long.into_iter().chain(medium.nodes).chain(short.nodes).collect(),
        edges: medium.edges.into_iter().chain(short.edges).collect(),
        highlights: Vec::new(),
        timeline: Vec::new(),
        drop_ledger: medium.dropped.into_iter().chain(short.dropped).collect(),
    };
    h.highlights =
        h.level_nodes(Level::Short).map(|s| align_key_phrase(s, &h, transcript)).collect();
    h.timeline = timeline(&h);

    debug_assert!(
        validate_hierarchy(&h, transcript).is_empty(),
        "{:?}",
        validate_hierarchy(&h, transcript)
    );
    Ok(h)
}
