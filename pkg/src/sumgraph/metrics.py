"""Clustering quality against a ground truth: majority accuracy and Gini impurity.

Vertices are grouped by their predicted cluster; inside each cluster the
ground-truth categories are counted. The largest category per cluster
counts as correct, and the impurity of a cluster is 1 minus the sum of
squared category proportions, averaged over clusters weighted by relative
cluster size.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Mapping


class VertexSetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Clustering:
    """One cluster id per vertex."""

    assignment: Mapping[Hashable, Hashable]

    @property
    def n(self) -> int:
        return len(self.assignment)

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        """Vertices are the positions 0..len-1."""
        return cls({i: label for i, label in enumerate(labels)})


def _as_assignment(c) -> Mapping[Hashable, Hashable]:
    if isinstance(c, Clustering):
        return c.assignment
    if isinstance(c, Mapping):
        return c
    raise TypeError(f"expected Clustering or mapping, got {type(c).__name__}")


@dataclass
class ClusterBreakdown:
    cluster: Hashable
    size: int
    majority: int
    impurity: float


@dataclass
class ImpurityReport:
    accuracy: float
    gini: float
    clusters: int
    per_cluster: list[ClusterBreakdown] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "accuracy": self.accuracy,
            "gini": self.gini,
            "clusters": self.clusters,
            "per_cluster": [
                {
                    "cluster": str(b.cluster),
                    "size": b.size,
                    "majority": b.majority,
                    "impurity": b.impurity,
                }
                for b in self.per_cluster
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def tsv_rows(self) -> list[str]:
        rows = ["cluster\tsize\tmajority\timpurity"]
        rows += [
            f"{b.cluster}\t{b.size}\t{b.majority}\t{b.impurity:.12g}"
            for b in self.per_cluster
        ]
        return rows


def evaluate(pred, truth) -> ImpurityReport:
    """Majority accuracy and size-weighted Gini impurity of pred vs truth.

    Both sides must cover exactly the same vertices. Ties for the majority
    category contribute one tied category's size, which is the maximum
    count either way.
    """
    pred_a = _as_assignment(pred)
    truth_a = _as_assignment(truth)
    if pred_a.keys() != truth_a.keys():
        only_pred = len(pred_a.keys() - truth_a.keys())
        only_truth = len(truth_a.keys() - pred_a.keys())
        raise VertexSetMismatch(
            f"{only_pred} vertices only in pred, {only_truth} only in truth"
        )
    n = len(pred_a)
    if n == 0:
        return ImpurityReport(accuracy=0.0, gini=0.0, clusters=0)

    category_counts: dict[Hashable, Counter] = defaultdict(Counter)
    for vertex, cluster in pred_a.items():
        category_counts[cluster][truth_a[vertex]] += 1

    correct = 0
    gini = 0.0
    breakdown: list[ClusterBreakdown] = []
    for cluster, counts in category_counts.items():
        size = sum(counts.values())
        majority = max(counts.values())
        impurity = 1.0 - sum((c / size) ** 2 for c in counts.values())
        correct += majority
        gini += (size / n) * impurity
        breakdown.append(ClusterBreakdown(cluster, size, majority, impurity))
    breakdown.sort(key=lambda b: (-b.size, str(b.cluster)))
    return ImpurityReport(
        accuracy=correct / n,
        gini=gini,
        clusters=len(category_counts),
        per_cluster=breakdown,
    )


@dataclass
class ClassStats:
    histogram: list[tuple[Hashable, int]]  # descending count
    num_classes: int
    singleton_count: int
    singleton_fraction: float
    n: int

    def rank_probabilities(self) -> list[tuple[int, float]]:
        """(rank, likelihood) pairs, rank 1 = most frequent class."""
        return [
            (rank, count / self.n)
            for rank, (_, count) in enumerate(self.histogram, 1)
        ]

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "num_classes": self.num_classes,
            "singleton_count": self.singleton_count,
            "singleton_fraction": self.singleton_fraction,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def class_stats(truth) -> ClassStats:
    """Descending class histogram plus singleton summary scalars."""
    assignment = _as_assignment(truth)
    counts = Counter(assignment.values())
    histogram = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))
    singleton_count = sum(1 for _, c in counts.items() if c == 1)
    num_classes = len(counts)
    return ClassStats(
        histogram=histogram,
        num_classes=num_classes,
        singleton_count=singleton_count,
        singleton_fraction=singleton_count / num_classes if num_classes else 0.0,
        n=len(assignment),
    )
