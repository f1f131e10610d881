from collections import Counter

import pytest

from sumgraph.metrics import (
    Clustering,
    VertexSetMismatch,
    class_stats,
    evaluate,
)

TOL = 1e-12


def test_identical_clusterings_are_pure():
    truth = {f"v{i}": i % 3 for i in range(30)}
    report = evaluate(truth, truth)
    assert report.accuracy == 1.0
    assert report.gini == 0.0
    assert report.clusters == 3


def test_single_cluster_three_one_split():
    # hand evaluation: acc = 3/4, gini = 1 - (9/16 + 1/16) = 0.375
    pred = {v: "only" for v in "abcd"}
    truth = {"a": "x", "b": "x", "c": "x", "d": "y"}
    report = evaluate(pred, truth)
    assert abs(report.accuracy - 0.75) < TOL
    assert abs(report.gini - 0.375) < TOL
    assert report.per_cluster[0].size == 4
    assert report.per_cluster[0].majority == 3


@pytest.mark.parametrize("n", [2, 7, 100])
def test_all_merged_against_singleton_truth_closed_form(n):
    # closed form: acc = 1/N, gini = 1 - N*(1/N)^2 = 1 - 1/N
    pred = {i: 0 for i in range(n)}
    truth = {i: i for i in range(n)}
    report = evaluate(pred, truth)
    assert abs(report.accuracy - 1 / n) < TOL
    assert abs(report.gini - (1 - 1 / n)) < TOL


def test_majority_ties_use_the_tied_size():
    pred = {v: "c" for v in "abcd"}
    truth = {"a": 0, "b": 0, "c": 1, "d": 1}
    report = evaluate(pred, truth)
    assert abs(report.accuracy - 0.5) < TOL


def test_vertex_set_mismatch():
    with pytest.raises(VertexSetMismatch):
        evaluate({"a": 0}, {"b": 0})
    with pytest.raises(VertexSetMismatch):
        evaluate({"a": 0, "b": 0}, {"a": 0})


def test_relabeling_invariance(rng):
    vertices = [f"v{i}" for i in range(200)]
    pred = {v: int(rng.integers(5)) for v in vertices}
    truth = {v: int(rng.integers(4)) for v in vertices}
    relabel_pred = {v: f"cluster-{c}" for v, c in pred.items()}
    relabel_truth = {v: (c + 100) * 7 for v, c in truth.items()}
    a = evaluate(pred, truth)
    b = evaluate(relabel_pred, relabel_truth)
    assert abs(a.accuracy - b.accuracy) < TOL
    assert abs(a.gini - b.gini) < TOL


def test_refining_pred_never_hurts(rng):
    vertices = list(range(300))
    truth = {v: int(rng.integers(6)) for v in vertices}
    pred = {v: int(rng.integers(3)) for v in vertices}
    base = evaluate(pred, truth)
    # split every cluster in two, randomly
    refined = {v: (c, int(rng.integers(2))) for v, c in pred.items()}
    report = evaluate(refined, truth)
    assert report.accuracy >= base.accuracy - TOL
    assert report.gini <= base.gini + TOL


def test_bounds(rng):
    vertices = list(range(100))
    truth = {v: int(rng.integers(7)) for v in vertices}
    pred = {v: int(rng.integers(4)) for v in vertices}
    report = evaluate(pred, truth)
    n_truth_classes = len(set(truth.values()))
    assert 0.0 < report.accuracy <= 1.0
    assert 0.0 <= report.gini <= 1.0 - 1.0 / n_truth_classes + TOL


def test_empty_clusterings():
    report = evaluate({}, {})
    assert report.clusters == 0


# -- class_stats --------------------------------------------------------------


def test_all_distinct_labels():
    stats = class_stats({i: i for i in range(10)})
    assert stats.num_classes == 10
    assert stats.singleton_fraction == 1.0


def test_all_equal_labels():
    stats = class_stats({i: "same" for i in range(10)})
    assert stats.num_classes == 1
    assert stats.singleton_count == 0
    assert stats.singleton_fraction == 0.0


def test_histogram_against_group_by_oracle(rng):
    labels = {i: int(rng.integers(20)) for i in range(500)}
    oracle = Counter(labels.values())
    stats = class_stats(labels)
    assert dict(stats.histogram) == dict(oracle)
    counts = [c for _, c in stats.histogram]
    assert counts == sorted(counts, reverse=True)
    assert stats.singleton_count == sum(1 for c in oracle.values() if c == 1)


def test_rank_probabilities_sum_to_one(rng):
    labels = {i: int(rng.integers(10)) for i in range(100)}
    stats = class_stats(labels)
    series = stats.rank_probabilities()
    assert series[0][0] == 1
    assert abs(sum(p for _, p in series) - 1.0) < TOL


def test_clustering_wrapper():
    c = Clustering.from_labels(["a", "b", "a"])
    assert c.n == 3
    report = evaluate(c, c)
    assert report.accuracy == 1.0
