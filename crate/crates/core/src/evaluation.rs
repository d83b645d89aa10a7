//! Automatic scoring of LONG summaries against their source segments, used
//! to compare segmentation strategies.
//!
//! Only the first summary level is scored: higher levels are built from
//! clusters whose quality depends on the segmentation being judged.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::EvaluationError;
use crate::hierarchy::summarize_units;
use crate::model::{cosine_similarity, HeuristicScore, PipelineConfig, Transcript};
use crate::providers::{bounded_map, embed, score_similarity, Embedder, Providers, Scorer};
use crate::segmentation::{naive_transcript_segments, segment_transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    NaiveFixed,
    CorefSemantic,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::NaiveFixed => "NAIVE_FIXED",
            Strategy::CorefSemantic => "COREF_SEMANTIC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Aggregation {
    UnweightedMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScore {
    pub segment_id: String,
    pub score: HeuristicScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub recording_id: String,
    pub strategy: Strategy,
    pub aggregation: Aggregation,
    pub per_segment: Vec<SegmentScore>,
    pub aggregate: f64,
}

impl EvaluationReport {
    /// Builds a report, computing the aggregate from `per_segment`.
    pub fn new(
        recording_id: impl Into<String>,
        strategy: Strategy,
        per_segment: Vec<SegmentScore>,
    ) -> Result<Self, EvaluationError> {
        if per_segment.is_empty() {
            return Err(EvaluationError::NoSegments);
        }
        let aggregate = mean(per_segment.iter().map(|s| s.score.mean));
        Ok(Self {
            recording_id: recording_id.into(),
            strategy,
            aggregation: Aggregation::UnweightedMean,
            per_segment,
            aggregate,
        })
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Mean of the scorer's similarity and the cosine of the two embeddings.
pub fn heuristic_score(
    reference: &str,
    candidate: &str,
    scorer: &dyn Scorer,
    embedder: &dyn Embedder,
) -> Result<HeuristicScore, EvaluationError> {
    let coherence = score_similarity(reference, candidate, scorer)?;
    let a = embed(reference, embedder)?;
    let b = embed(candidate, embedder)?;
    let retention = cosine_similarity(&a, &b)?;
    Ok(HeuristicScore::new(coherence, retention))
}

struct Segment {
    id: String,
    units: Vec<String>,
}

fn strategy_segments(
    t: &Transcript,
    strategy: Strategy,
    providers: &Providers,
    config: &PipelineConfig,
) -> Result<Vec<Segment>, EvaluationError> {
    Ok(match strategy {
        Strategy::NaiveFixed => naive_transcript_segments(t, config.naive_segment_len)
            .into_iter()
            .map(|s| Segment { id: format!("N-{:03}", s.id), units: vec![s.text] })
            .collect(),
        Strategy::CorefSemantic => {
            segment_transcript(t, providers.coref.as_ref(), config, providers.parallelism)?
                .into_iter()
                .map(|c| Segment {
                    id: format!("C-{:03}", c.id),
                    units: c.sentence_range.iter().map(|s| t.sentences()[s].text.clone()).collect(),
                })
                .collect()
        }
    })
}

/// Segments `t` with `strategy`, summarizes each segment once and scores
/// the summary against the segment text.
pub fn evaluate_strategy(
    t: &Transcript,
    strategy: Strategy,
    providers: &Providers,
    config: &PipelineConfig,
) -> Result<EvaluationReport, EvaluationError> {
    let segments = strategy_segments(t, strategy, providers, config)?;
    let scored = bounded_map(&segments, providers.parallelism, |seg| {
        let reference = seg.units.join(" ");
        let candidate = summarize_units(&seg.units, providers.summarizer.as_ref(), config)?;
        let score = heuristic_score(
            &reference,
            &candidate,
            providers.scorer.as_ref(),
            providers.embedder.as_ref(),
        )?;
        Ok::<_, EvaluationError>(SegmentScore { segment_id: seg.id.clone(), score })
    });
    let per_segment = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    EvaluationReport::new(t.recording_id(), strategy, per_segment)
}

/// Aggregate difference `a − b` between two strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDelta {
    pub a: Strategy,
    pub b: Strategy,
    pub delta: f64,
}

/// Every pairwise delta, in input order: `(0,1), (0,2), …, (1,2), …`.
pub fn compare_strategies(
    reports: &[EvaluationReport],
) -> Result<Vec<StrategyDelta>, EvaluationError> {
    let [first, ..] = reports else {
        return Err(EvaluationError::TooFewReports);
    };
    if reports.len() < 2 {
        return Err(EvaluationError::TooFewReports);
    }
    if let Some(other) = reports.iter().find(|r| r.recording_id != first.recording_id) {
        return Err(EvaluationError::RecordingMismatch(
            first.recording_id.clone(),
            other.recording_id.clone(),
        ));
    }
    let mut out = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            out.push(StrategyDelta { a: a.strategy, b: b.strategy, delta: a.aggregate - b.aggregate });
        }
    }
    Ok(out)
}

/// Aligned plain-text table: one row per report, then the deltas.
pub fn render_table(reports: &[EvaluationReport], deltas: &[StrategyDelta]) -> String {
    let width = reports
        .iter()
        .map(|r| r.strategy.label().len())
        .chain(["Strategy".len()])
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>8}  {:>9}", "Strategy", "Segments", "Aggregate");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>9.4}",
            r.strategy.label(),
            r.per_segment.len(),
            r.aggregate
        );
    }
    for d in deltas {
        let _ = writeln!(out, "{} - {}: {:+.4}", d.a.label(), d.b.label(), d.delta);
    }
    out
}
