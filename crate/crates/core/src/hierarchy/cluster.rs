use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{BuildError, VectorError};
use crate::model::{DistanceMatrix, EmbeddingVector, IndexRange, Linkage, SummaryNode};
use crate::providers::{bounded_map, embed, Embedder};

/// Pairwise cosine distances `1 - v_i·v_j`, clamped to `[0, 2]`.
pub fn build_distance_matrix(embeddings: &[EmbeddingVector]) -> Result<DistanceMatrix, VectorError> {
    let n = embeddings.len();
    if let Some(first) = embeddings.first() {
        for e in embeddings {
            if e.dim() != first.dim() {
                return Err(VectorError::DimensionMismatch { left: first.dim(), right: e.dim() });
            }
        }
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (1.0 - embeddings[i].dot(&embeddings[j])?).clamp(0.0, 2.0);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    let m = DistanceMatrix::from_entries_unchecked(n, entries);
    debug_assert!(m.check_laws().is_ok());
    Ok(m)
}

/// Bottom-up clustering that merges the closest pair of clusters while
/// their linkage distance is strictly below `threshold`.
///
/// Ties go to the pair whose smallest member ordinals are lexicographically
/// lowest. Returns one label per item, numbered in order of each cluster's
/// first member.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage, threshold: f64) -> Vec<usize> {
    let n = d.n();
    // Slot k holds the cluster whose smallest member is k. `link[a][b]` is
    // the pairwise sum (average), min (single) or max (complete).
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut link: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();

    let distance = |link: &Vec<Vec<f64>>, members: &Vec<Option<Vec<usize>>>, a: usize, b: usize| {
        match linkage {
            Linkage::Average => {
                let na = members[a].as_ref().map_or(0, Vec::len);
                let nb = members[b].as_ref().map_or(0, Vec::len);
                link[a][b] / (na * nb) as f64
            }
            Linkage::Single | Linkage::Complete => link[a][b],
        }
    };

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if members[a].is_none() {
                continue;
            }
            for b in a + 1..n {
                if members[b].is_none() {
                    continue;
                }
                let dist = distance(&link, &members, a, b);
                if best.is_none_or(|(bd, _, _)| dist < bd) {
                    best = Some((dist, a, b));
                }
            }
        }
        let Some((dist, a, b)) = best else { break };
        // NaN distances never merge
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(dist < threshold) {
            break;
        }
        let absorbed = members[b].take().expect("active");
        members[a].as_mut().expect("active").extend(absorbed);
        for k in 0..n {
            if k == a || k == b || members[k].is_none() {
                continue;
            }
            let merged = match linkage {
                Linkage::Average => link[k][a] + link[k][b],
                Linkage::Single => link[k][a].min(link[k][b]),
                Linkage::Complete => link[k][a].max(link[k][b]),
            };
            link[k][a] = merged;
            link[a][k] = merged;
        }
    }

    let mut labels = vec![0; n];
    for (label, group) in members.iter().flatten().enumerate() {
        for &i in group {
            labels[i] = label;
        }
    }
    labels
}

/// Cluster labels for a level's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    pub item_ids: Vec<String>,
    /// Parallel to `item_ids`.
    pub labels: Vec<usize>,
    pub within_turn: bool,
}

impl ClusterAssignment {
    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.item_ids.iter().position(|i| i == id).map(|p| self.labels[p])
    }

    pub fn cluster_count(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Clusters pre-computed embeddings. With `within_turn`, nodes are grouped
/// by speaker turn and each group clustered on its own, so no cluster mixes
/// turns.
pub fn cluster_embedded(
    nodes: &[SummaryNode],
    embeddings: &[EmbeddingVector],
    within_turn: bool,
    linkage: Linkage,
    threshold: f64,
) -> Result<ClusterAssignment, BuildError> {
    if nodes.is_empty() {
        return Err(BuildError::EmptyLevel);
    }
    assert_eq!(nodes.len(), embeddings.len(), "one embedding per node");

    let mut groups: BTreeMap<Option<IndexRange>, Vec<usize>> = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        let key = within_turn.then_some(n.turn_range);
        groups.entry(key).or_default().push(i);
    }

    let mut raw = vec![(0usize, 0usize); nodes.len()];
    for (g, idx) in groups.values().enumerate() {
        let sub: Vec<EmbeddingVector> = idx.iter().map(|&i| embeddings[i].clone()).collect();
        let d = build_distance_matrix(&sub)?;
        for (local, label) in agglomerate(&d, linkage, threshold).into_iter().enumerate() {
            raw[idx[local]] = (g, label);
        }
    }

    // renumber by first appearance in node order
    let mut seen: Vec<(usize, usize)> = Vec::new();
    let labels = raw
        .iter()
        .map(|key| match seen.iter().position(|k| k == key) {
            Some(p) => p,
            None => {
                seen.push(*key);
                seen.len() - 1
            }
        })
        .collect();

    Ok(ClusterAssignment {
        item_ids: nodes.iter().map(|n| n.id.clone()).collect(),
        labels,
        within_turn,
    })
}

/// Embeds every node (up to `parallelism` calls at once) and clusters.
pub fn cluster_summaries(
    nodes: &[SummaryNode],
    embedder: &dyn Embedder,
    within_turn: bool,
    linkage: Linkage,
    threshold: f64,
    parallelism: usize,
) -> Result<ClusterAssignment, BuildError> {
    let embeddings = embed_nodes(nodes, embedder, parallelism)?;
    cluster_embedded(nodes, &embeddings, within_turn, linkage, threshold)
}

pub(crate) fn embed_nodes(
    nodes: &[SummaryNode],
    embedder: &dyn Embedder,
    parallelism: usize,
) -> Result<Vec<EmbeddingVector>, BuildError> {
    bounded_map(nodes, parallelism, |n| embed(&n.text, embedder))
        .into_iter()
        .map(|r| r.map_err(BuildError::from))
        .collect()
}
