//! Whitespace tokenization shared by every word budget in the pipeline.

/// Number of maximal whitespace-separated tokens in `text`.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// First `n` whitespace tokens of `text`, re-joined with single spaces.
pub fn take_words(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// Joins non-empty pieces with single spaces.
pub fn join_words<I, S>(pieces: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for piece in pieces {
        let piece = piece.as_ref().trim();
        if piece.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

/// `⌈ratio × words⌉`, never below 1.
pub fn word_budget(ratio: f64, words: usize) -> usize {
    // 0.3 * 10 evaluates to 3.0000000000000004
    ((ratio * words as f64 - 1e-9).ceil() as usize).max(1)
}
