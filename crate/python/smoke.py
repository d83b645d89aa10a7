"""Smoke test for the skimsum_py extension module.

Build and run from the repository root:

    cargo build --release -p skimsum-py --features extension-module
    cp target/release/libskimsum_py.so python/skimsum_py.so
    python3 python/smoke.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import skimsum_py as sk  # noqa: E402


def main() -> None:
    words = [f"w{i}" for i in range(154)]
    assert [len(s) for s in sk.naive_segment(words, 60)] == [60, 60, 34]
    assert sk.word_count("  two   words ") == 2

    text = "The ferry leaves the harbor at noon."
    assert sk.heuristic_score(text, text) == (1.0, 1.0, 1.0)

    cfg = sk.PipelineConfig('{"compression_ratio": 0.4}')
    assert cfg.compression_ratio == 0.4
    try:
        sk.PipelineConfig('{"compression_ratio": 0}')
    except ValueError:
        pass
    else:
        raise AssertionError("ratio 0 accepted")

    t, coref = sk.marked_transcript(
        "demo",
        [
            ("ana", ["⟨e1:The ferry⟩ was late again.", "⟨e1:It⟩ left at noon.", "Nobody liked ⟨e1:it⟩."]),
            ("ben", ["The council met on Tuesday.", "They argued about the budget for hours."]),
        ],
    )
    assert (t.turn_count, t.sentence_count) == (2, 5)
    assert sk.validate(t.to_json()) == []
    assert sk.Transcript.from_json(t.to_json()).word_count == t.word_count

    h = sk.build_hierarchy(t, cfg, coref)
    counts = [h.level_count(level) for level in ("LONG", "MEDIUM", "SHORT")]
    assert counts[2] <= counts[1] <= counts[0], counts
    long_nodes = h.nodes("long")
    assert long_nodes[0][2] == (0, 2), long_nodes
    assert sk.Hierarchy.from_json(h.to_json()).to_json() == h.to_json()

    big, big_coref = sk.synthetic_recording("syn", 3000, 7)
    a = sk.build_hierarchy(big, coref=big_coref).to_json()
    b = sk.build_hierarchy(big, coref=big_coref).to_json()
    assert a == b

    reports = {
        s: json.loads(sk.evaluate(big, s, coref=big_coref)) for s in ("naive", "semantic")
    }
    for r in reports.values():
        means = [seg["score"]["mean"] for seg in r["per_segment"]]
        assert abs(r["aggregate"] - sum(means) / len(means)) < 1e-12
    print(
        f"ok: {big.word_count} words, levels {counts}, "
        f"naive {reports['naive']['aggregate']:.4f}, semantic {reports['semantic']['aggregate']:.4f}"
    )


if __name__ == "__main__":
    main()
