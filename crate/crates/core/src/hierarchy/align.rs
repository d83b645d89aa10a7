use crate::model::{
    Hierarchy, HighlightLevel, HighlightLink, HighlightTarget, Level, SummaryNode, TimelineEntry,
    Transcript,
};

pub const MIN_PHRASE_WORDS: usize = 3;

struct Token {
    folded: String,
    char_start: usize,
    char_end: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut pos = 0;
    for c in text.chars() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                out.push((s, pos));
                start = None;
            }
            _ => {}
        }
        pos += 1;
    }
    if let Some(s) = start {
        out.push((s, pos));
    }
    let chars: Vec<char> = text.chars().collect();
    out.into_iter()
        .map(|(s, e)| Token {
            folded: chars[s..e].iter().collect::<String>().to_lowercase(),
            char_start: s,
            char_end: e,
        })
        .collect()
}

/// Longest common run of case-folded tokens: `(start in a, start in b, len)`.
/// Ties keep the earliest position in `a`, then in `b`.
fn longest_common_run(a: &[Token], b: &[Token]) -> (usize, usize, usize) {
    let mut best = (0, 0, 0);
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        for (j, tb) in b.iter().enumerate() {
            cur[j + 1] = if ta.folded == tb.folded { prev[j] + 1 } else { 0 };
            let len = cur[j + 1];
            if len > best.2 {
                best = (i + 1 - len, j + 1 - len, len);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// First occurrence of `phrase` (as folded tokens) in `text`, as a
/// half-open char range.
fn locate(phrase: &[String], text: &str) -> Option<(usize, usize)> {
    let tokens = tokenize(text);
    let chars: Vec<char> = text.chars().collect();
    let joined = phrase.join(" ");
    tokens.windows(phrase.len()).find_map(|w| {
        let matches = w.iter().zip(phrase).all(|(t, p)| &t.folded == p);
        let (s, e) = (w[0].char_start, w[w.len() - 1].char_end);
        let exact = chars[s..e].iter().collect::<String>().to_lowercase() == joined;
        (matches && exact).then_some((s, e))
    })
}

fn descendants<'a>(h: &'a Hierarchy, node: &'a SummaryNode) -> Vec<&'a SummaryNode> {
    let mut out = Vec::new();
    let mut frontier = vec![node];
    while let Some(n) = frontier.pop() {
        for k in h.children(&n.id) {
            out.push(k);
            frontier.push(k);
        }
    }
    out.sort_by_key(|n| (n.level != Level::Medium, n.transcript_span.first()));
    out
}

/// Longest case-folded word n-gram (n ≥ 3) shared by a SHORT node's text
/// and the transcript sentences under it, with its location in the SHORT
/// text, each MEDIUM and LONG descendant containing it, and the transcript.
pub fn align_key_phrase(short: &SummaryNode, h: &Hierarchy, transcript: &Transcript) -> HighlightLink {
    let source = transcript.sentences_text(short.transcript_span);
    let a = tokenize(&short.text);
    let b = tokenize(&source);
    let (start, _, len) = longest_common_run(&a, &b);
    if len < MIN_PHRASE_WORDS {
        return HighlightLink { short_node_id: short.id.clone(), phrase: String::new(), targets: vec![] };
    }
    let phrase: Vec<String> = a[start..start + len].iter().map(|t| t.folded.clone()).collect();

    let mut targets = Vec::new();
    let mut push = |level, node_id: Option<&str>, text: &str| {
        if let Some((s, e)) = locate(&phrase, text) {
            targets.push(HighlightTarget {
                level,
                node_id: node_id.map(str::to_string),
                char_start: s,
                char_end: e,
            });
        }
    };
    push(HighlightLevel::Short, Some(&short.id), &short.text);
    for d in descendants(h, short) {
        let level = match d.level {
            Level::Medium => HighlightLevel::Medium,
            Level::Long => HighlightLevel::Long,
            Level::Short => continue,
        };
        push(level, Some(&d.id), &d.text);
    }
    push(HighlightLevel::Transcript, None, &source);

    HighlightLink { short_node_id: short.id.clone(), phrase: phrase.join(" "), targets }
}

/// SHORT nodes as fractions of the recording's duration.
pub fn timeline(h: &Hierarchy) -> Vec<TimelineEntry> {
    let duration = if h.audio_duration_s > 0.0 {
        h.audio_duration_s
    } else {
        h.nodes.iter().map(|n| n.time_range_s[1]).fold(0.0, f64::max)
    };
    h.level_nodes(Level::Short)
        .map(|n| {
            let frac = |t: f64| if duration > 0.0 { (t / duration).clamp(0.0, 1.0) } else { 0.0 };
            TimelineEntry {
                short_node_id: n.id.clone(),
                start_fraction: frac(n.time_range_s[0]),
                end_fraction: frac(n.time_range_s[1]),
            }
        })
        .collect()
}
