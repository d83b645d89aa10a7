use crate::error::ProviderError;
use crate::model::{Level, PipelineConfig, SemanticChunk, SummaryNode, Transcript};
use crate::providers::{summarize_text, Summarizer};
use crate::text::{join_words, word_count};

/// Packs `units` greedily into windows of at most `max_words` words without
/// splitting a unit. A unit longer than `max_words` is cut into fixed
/// `max_words` pieces.
pub fn pack_windows<S: AsRef<str>>(units: &[S], max_words: usize) -> Vec<String> {
    assert!(max_words >= 1);
    let mut windows: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut current_words = 0;
    let flush = |current: &mut Vec<&str>, current_words: &mut usize, windows: &mut Vec<String>| {
        if !current.is_empty() {
            windows.push(join_words(current.drain(..)));
            *current_words = 0;
        }
    };
    for unit in units {
        let unit = unit.as_ref();
        let n = word_count(unit);
        if n == 0 {
            continue;
        }
        if n > max_words {
            flush(&mut current, &mut current_words, &mut windows);
            let tokens: Vec<&str> = unit.split_whitespace().collect();
            windows.extend(tokens.chunks(max_words).map(|c| c.join(" ")));
            continue;
        }
        if current_words + n > max_words {
            flush(&mut current, &mut current_words, &mut windows);
        }
        current.push(unit);
        current_words += n;
    }
    flush(&mut current, &mut current_words, &mut windows);
    windows
}

fn ceil_words(ratio: f64, words: usize) -> usize {
    (ratio * words as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Per-window budgets that sum to `⌈ratio × total⌉`: window `i` gets
/// `⌈ratio·cum_i⌉ − ⌈ratio·cum_{i−1}⌉`, floored at one word.
pub fn window_budgets(window_words: &[usize], ratio: f64) -> Vec<usize> {
    let mut cum = 0;
    let mut prev = 0;
    window_words
        .iter()
        .map(|&w| {
            cum += w;
            let upto = ceil_words(ratio, cum);
            let b = upto.saturating_sub(prev).max(1);
            prev = upto;
            b
        })
        .collect()
}

/// Summarizes text given as ordered units (sentences or member summaries).
///
/// Input over `summarizer_max_input_words` is windowed; each window is
/// summarized `summarizer_passes` times under its budget and the outputs
/// are joined in order.
pub fn summarize_units<S: AsRef<str>>(
    units: &[S],
    summarizer: &dyn Summarizer,
    config: &PipelineConfig,
) -> Result<String, ProviderError> {
    let windows = pack_windows(units, config.summarizer_max_input_words);
    let sizes: Vec<usize> = windows.iter().map(|w| word_count(w)).collect();
    let budgets = window_budgets(&sizes, config.compression_ratio);
    let mut outputs = Vec::with_capacity(windows.len());
    for (window, budget) in windows.into_iter().zip(budgets) {
        let mut text = window;
        for _ in 0..config.summarizer_passes {
            text = summarize_text(&text, budget, summarizer)?;
        }
        outputs.push(text);
    }
    Ok(join_words(outputs))
}

/// Summary text plus whether it fell back to the unsummarized input.
pub(crate) fn summarize_or_fallback<S: AsRef<str>>(
    units: &[S],
    summarizer: &dyn Summarizer,
    config: &PipelineConfig,
) -> (String, bool) {
    match summarize_units(units, summarizer, config) {
        Ok(text) => (text, false),
        Err(e) => {
            log::warn!("summarizer failed, keeping source text: {e}");
            (join_words(units.iter().map(AsRef::as_ref)), true)
        }
    }
}

/// LONG node for one chunk. Provider failures degrade to the raw chunk text.
pub fn summarize_chunk(
    chunk: &SemanticChunk,
    ordinal: usize,
    transcript: &Transcript,
    summarizer: &dyn Summarizer,
    config: &PipelineConfig,
) -> SummaryNode {
    let sentences: Vec<&str> = chunk
        .sentence_range
        .iter()
        .map(|s| transcript.sentences()[s].text.as_str())
        .collect();
    let (text, degraded) = summarize_or_fallback(&sentences, summarizer, config);
    let mut node = SummaryNode::new(
        Level::Long,
        ordinal,
        text,
        vec![chunk.id.to_string()],
        chunk.sentence_range,
        transcript,
    );
    node.degraded = degraded;
    node
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::FakeSummarizer;

    fn words(n: usize, tag: &str) -> String {
        (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn windows_respect_sentence_boundaries() {
        let units = [words(30, "a"), words(25, "b"), words(20, "c"), words(79, "d")];
        let w = pack_windows(&units, 60);
        let sizes: Vec<usize> = w.iter().map(|x| word_count(x)).collect();
        assert_eq!(sizes, vec![55, 20, 60, 19]);
    }

    #[test]
    fn budgets_sum_to_total() {
        // 59 + 59 + 36 = 154 words; independent ceilings would give 78
        let b = window_budgets(&[59, 59, 36], 0.5);
        assert_eq!(b.iter().sum::<usize>(), 77);
        assert_eq!(b, vec![30, 29, 18]);
        assert_eq!(window_budgets(&[10], 0.5), vec![5]);
    }

    #[test]
    fn ten_word_chunk_gives_five() {
        let cfg = PipelineConfig::default();
        let out = summarize_units(&[words(10, "w")], &FakeSummarizer::new(), &cfg).unwrap();
        assert_eq!(word_count(&out), 5);
    }

    #[test]
    fn multiple_passes_keep_budget() {
        let cfg = PipelineConfig { summarizer_passes: 3, ..Default::default() };
        let out = summarize_units(&[words(10, "w")], &FakeSummarizer::new(), &cfg).unwrap();
        assert_eq!(out, "w0 w1 w2 w3 w4");
    }
}
