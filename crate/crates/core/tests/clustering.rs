mod support;

use skimsum::hierarchy::{agglomerate, build_distance_matrix, cluster_summaries};
use skimsum::model::{EmbeddingVector, IndexRange, Level, Linkage, SummaryNode};

use support::{clustering_cases, dot, exhaustive_agglomerative, TableEmbedder, PALETTE};

fn node(i: usize, turn: usize) -> SummaryNode {
    SummaryNode {
        id: Level::Long.node_id(i),
        level: Level::Long,
        text: format!("node {i}"),
        word_count: 2,
        source_ids: vec![],
        transcript_span: IndexRange::single(i),
        turn_range: IndexRange::single(turn),
        time_range_s: [0.0, 0.0],
        degraded: false,
    }
}

#[test]
fn hand_built_sets_match_exhaustive_oracle() {
    for (case, (indices, linkage, threshold)) in clustering_cases().into_iter().enumerate() {
        let vectors: Vec<Vec<f64>> = indices.iter().map(|&p| PALETTE[p].to_vec()).collect();
        let nodes: Vec<SummaryNode> = (0..vectors.len()).map(|i| node(i, 0)).collect();
        let embedder = TableEmbedder::new(
            nodes.iter().map(|n| n.text.clone()).zip(vectors.iter().cloned()).collect(),
        );
        let dist: Vec<Vec<f64>> =
            vectors.iter().map(|a| vectors.iter().map(|b| 1.0 - dot(a, b)).collect()).collect();
        let expected = exhaustive_agglomerative(&dist, linkage, threshold);
        let got = cluster_summaries(&nodes, &embedder, false, linkage, threshold, 2).unwrap();
        assert_eq!(got.labels, expected, "case {case}: {indices:?} {linkage:?} {threshold}");
    }
}

#[test]
fn two_tight_pairs() {
    // pairs at distance 0.5 apart from each other's partner by 1.0
    let vectors = [PALETTE[0], PALETTE[4], PALETTE[2], PALETTE[7]];
    let emb: Vec<EmbeddingVector> =
        vectors.iter().map(|v| EmbeddingVector::normalized(v.to_vec()).unwrap()).collect();
    let d = build_distance_matrix(&emb).unwrap();
    assert_eq!(d.get(0, 1), 0.5);
    assert_eq!(d.get(2, 3), 0.5);
    assert_eq!(agglomerate(&d, Linkage::Average, 0.6), vec![0, 0, 1, 1]);
}

#[test]
fn distance_matrix_examples() {
    let e = |v: &[f64]| EmbeddingVector::normalized(v.to_vec()).unwrap();
    let d = build_distance_matrix(&[e(&[1.0, 0.0]), e(&[0.0, 1.0]), e(&[-1.0, 0.0]), e(&[1.0, 0.0])])
        .unwrap();
    assert_eq!(d.get(0, 1), 1.0);
    assert_eq!(d.get(0, 2), 2.0);
    assert_eq!(d.get(0, 3), 0.0);
    assert!(d.check_laws().is_ok());
    assert!(build_distance_matrix(&[e(&[1.0, 0.0]), e(&[1.0, 0.0, 0.0])]).is_err());
}

#[test]
fn turn_constraint_splits_identical_vectors() {
    let nodes = vec![node(0, 0), node(1, 0), node(2, 1), node(3, 1)];
    let embedder = TableEmbedder::new(
        nodes.iter().map(|n| (n.text.clone(), vec![1.0, 0.0])).collect(),
    );
    let within = cluster_summaries(&nodes, &embedder, true, Linkage::Average, 0.4, 1).unwrap();
    assert_eq!(within.labels, vec![0, 0, 1, 1]);
    let across = cluster_summaries(&nodes, &embedder, false, Linkage::Average, 0.4, 1).unwrap();
    assert_eq!(across.labels, vec![0, 0, 0, 0]);
}

#[test]
fn threshold_is_strict() {
    let emb: Vec<EmbeddingVector> = [PALETTE[0], PALETTE[4]]
        .iter()
        .map(|v| EmbeddingVector::normalized(v.to_vec()).unwrap())
        .collect();
    let d = build_distance_matrix(&emb).unwrap();
    assert_eq!(agglomerate(&d, Linkage::Single, 0.5), vec![0, 1]);
    assert_eq!(agglomerate(&d, Linkage::Single, 0.5000001), vec![0, 0]);
}
