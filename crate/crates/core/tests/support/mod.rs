//! Independent reference implementations and random fixture builders shared
//! by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use skimsum::model::{
    CorefAnnotation, EntityCluster, IndexRange, Linkage, MentionSpan, Transcript,
    TranscriptBuilder,
};
use skimsum::providers::{Embedder, ProviderDescriptor, ProviderKind};
use skimsum::ProviderError;

// ---------------------------------------------------------------------------
// chunking

/// Union-find over the turn's sentences: each interval links its adjacent
/// sentences. Returns components ordered by first sentence, flagged when
/// some interval covers them.
pub fn chunk_oracle(turn: (usize, usize), intervals: &[(usize, usize)]) -> Vec<((usize, usize), bool)> {
    let (lo, hi) = turn;
    let n = hi - lo + 1;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let mut covered = vec![false; n];
    for &(a, b) in intervals {
        let a = a.max(lo);
        let b = b.min(hi);
        if a > b {
            continue;
        }
        for s in a..=b {
            covered[s - lo] = true;
        }
        for s in a..b {
            let (x, y) = (find(&mut parent, s - lo), find(&mut parent, s + 1 - lo));
            parent[x] = y;
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for s in 0..n {
        let r = find(&mut parent, s);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(s),
            None => groups.push((r, vec![s])),
        }
    }
    let mut out: Vec<((usize, usize), bool)> = groups
        .into_iter()
        .map(|(_, m)| {
            let first = *m.iter().min().unwrap();
            let last = *m.iter().max().unwrap();
            ((first + lo, last + lo), covered[first])
        })
        .collect();
    out.sort();
    out
}

/// A turn of up to `max_sentences` sentences, placed after zero or one
/// lead-in turns, with up to `max_entities` random entity clusters.
pub fn random_turn(
    rng: &mut ChaCha8Rng,
    max_sentences: usize,
    max_entities: usize,
) -> (Transcript, CorefAnnotation) {
    let mut b = TranscriptBuilder::new("rand", "rand");
    let lead_in = rng.random_bool(0.5);
    if lead_in {
        b = b.turn("other", ["a lead in sentence."]);
    }
    let n = rng.random_range(1..=max_sentences);
    let sentences: Vec<String> = (0..n)
        .map(|s| {
            let len = rng.random_range(1..=8);
            (0..len).map(|w| format!("s{s}w{w}")).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let t = b.turn("speaker", sentences).build();
    let turn_index = usize::from(lead_in);
    let words = t.turn_word_range(turn_index);

    let k = rng.random_range(0..=max_entities);
    let clusters = (0..k)
        .map(|id| {
            let mentions = (0..rng.random_range(1..=4))
                .map(|_| {
                    let start = rng.random_range(words.first()..=words.last());
                    let end = (start + rng.random_range(0..2)).min(words.last());
                    mention(&t, start, end)
                })
                .collect();
            EntityCluster::new(id, mentions).unwrap()
        })
        .collect();
    (t, CorefAnnotation { turn_index, clusters })
}

pub fn mention(t: &Transcript, start: usize, end: usize) -> MentionSpan {
    let s = t.sentence_of_word(start).unwrap();
    let e = t.sentence_of_word(end).unwrap();
    MentionSpan {
        start_word: start,
        end_word: end,
        sentence_span: IndexRange::new(s, e).unwrap(),
        text: t.words()[start..=end].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "),
    }
}

// ---------------------------------------------------------------------------
// clustering

/// Agglomerative clustering recomputed from scratch at every step: every
/// pair of current clusters is scored from the raw pairwise distances.
pub fn exhaustive_agglomerative(dist: &[Vec<f64>], linkage: Linkage, threshold: f64) -> Vec<usize> {
    let n = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        clusters.sort_by_key(|c| c[0]);
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let pairs: Vec<f64> = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| dist[i][j]))
                    .collect();
                let d = match linkage {
                    Linkage::Single => pairs.iter().cloned().fold(f64::INFINITY, f64::min),
                    Linkage::Complete => pairs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    Linkage::Average => pairs.iter().sum::<f64>() / pairs.len() as f64,
                };
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d < threshold => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
                clusters[a].sort();
            }
            _ => break,
        }
    }
    clusters.sort_by_key(|c| c[0]);
    let mut labels = vec![0; n];
    for (label, c) in clusters.iter().enumerate() {
        for &i in c {
            labels[i] = label;
        }
    }
    labels
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Embedder returning fixed vectors for known texts.
pub struct TableEmbedder {
    descriptor: ProviderDescriptor,
    table: Vec<(String, Vec<f64>)>,
}

impl TableEmbedder {
    pub fn new(table: Vec<(String, Vec<f64>)>) -> Self {
        Self { descriptor: ProviderDescriptor::fake(ProviderKind::Embedder, "table"), table }
    }
}

impl Embedder for TableEmbedder {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        self.table
            .iter()
            .find(|(t, _)| t == text)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| ProviderError::InvalidInput(format!("no vector for {text:?}")))
    }
}

/// Embedder that maps every text to the same vector.
pub struct ConstantEmbedder(pub ProviderDescriptor);

impl ConstantEmbedder {
    pub fn new() -> Self {
        Self(ProviderDescriptor::fake(ProviderKind::Embedder, "constant"))
    }
}

impl Embedder for ConstantEmbedder {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.0
    }

    fn embed(&self, _: &str) -> Result<Vec<f64>, ProviderError> {
        Ok(vec![1.0, 0.0, 0.0])
    }
}

/// Unit vectors in four dimensions with entries in {0, ±1/2, ±1}, so every
/// pairwise cosine distance is one of 0, 1/2, 1, 3/2, 2 and exact.
pub const PALETTE: [[f64; 4]; 12] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.5, 0.5, 0.5, 0.5],
    [0.5, 0.5, -0.5, -0.5],
    [0.5, -0.5, 0.5, -0.5],
    [-0.5, 0.5, 0.5, -0.5],
    [-1.0, 0.0, 0.0, 0.0],
    [0.5, 0.5, 0.5, -0.5],
    [0.5, -0.5, -0.5, 0.5],
    [-0.5, -0.5, -0.5, -0.5],
];

/// Hand-built clustering problems: palette indices, linkage, threshold.
pub fn clustering_cases() -> Vec<(Vec<usize>, Linkage, f64)> {
    use Linkage::*;
    vec![
        (vec![0], Average, 0.4),
        (vec![0, 0], Average, 0.4),
        (vec![0, 1], Average, 0.4),
        (vec![0, 0, 1, 1], Average, 0.4),
        (vec![0, 4, 1], Single, 0.6),
        (vec![0, 4, 1], Complete, 0.6),
        (vec![0, 4, 1], Average, 1.1),
        (vec![0, 1, 2, 3], Single, 1.1),
        (vec![0, 1, 2, 3], Average, 1.1),
        (vec![4, 5, 6, 7], Average, 1.1),
        (vec![4, 9, 5, 0, 8], Single, 0.6),
        (vec![4, 9, 5, 0, 8], Average, 0.8),
        (vec![4, 9, 5, 0, 8], Complete, 1.6),
        (vec![0, 8, 4, 11, 1], Average, 1.1),
        (vec![0, 4, 9, 1, 5, 2, 6, 3, 7], Single, 0.6),
        (vec![0, 4, 9, 1, 5, 2, 6, 3, 7], Average, 1.1),
        (vec![0, 4, 9, 1, 5, 2, 6, 3, 7], Complete, 1.1),
        (vec![10, 11, 3, 3, 6, 0], Average, 0.6),
        (vec![2, 0, 2, 0, 2, 0], Single, 0.4),
        (vec![5, 10, 7, 1, 4, 9, 8, 11], Average, 1.6),
    ]
}

// ---------------------------------------------------------------------------
// highlights

/// Longest case-folded whitespace-token n-gram (n ≥ 3) present in both
/// texts, found by trying every n-gram of `a` from longest to shortest.
/// Among equals, the earliest in `a` wins.
pub fn longest_shared_ngram(a: &str, b: &str) -> Option<Vec<String>> {
    let fold = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>();
    let (ta, tb) = (fold(a), fold(b));
    for n in (3..=ta.len()).rev() {
        for i in 0..=ta.len() - n {
            let gram = &ta[i..i + n];
            if tb.windows(n).any(|w| w == gram) {
                return Some(gram.to_vec());
            }
        }
    }
    None
}
