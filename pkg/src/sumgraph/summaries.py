"""Lossless equivalence-class summaries.

Per subject, the model-specific neighborhood features are collected as
tagged strings, sorted byte-lexicographically, joined, and hashed with
FNV-1a 64-bit; the hash is the subject's equivalence class. Sorting before
hashing makes the class independent of the order edges appear in the
input, which is the defining requirement of the whole construction.

Two local conventions close gaps raw string concatenation would leave
open: items carry a kind tag ("P:" property, "T:" type, "N:" neighbor
signature) so a type IRI can never collide with an equal property IRI,
and joined items are separated by byte 0x1f, which cannot occur in IRIs,
so ["ab","c"] and ["a","bc"] hash differently.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .hashing import fnv1a_64
from .store import SubjectMap

TAG_PROPERTY = "P:"
TAG_TYPE = "T:"
TAG_NEIGHBOR = "N:"

_SEPARATOR = b"\x1f"

#: Class of a subject with no features at all (hash of the empty string).
EMPTY_CLASS = fnv1a_64(b"")


class SummaryModel(enum.Enum):
    AC = "ac"  # attribute collection: outgoing property set
    CC = "cc"  # class collection: rdf:type set
    PTC = "ptc"  # property type collection: both
    SX = "sx"  # schema-level: own types + neighbor type signatures

    @property
    def hops(self) -> int:
        return 2 if self is SummaryModel.SX else 1


def class_hex(eq_class: int) -> str:
    return f"{eq_class:016x}"


def canonical_hash(items: list[str]) -> int:
    """Sort items by byte order, join with 0x1f, hash with FNV-1a 64."""
    joined = _SEPARATOR.join(sorted(item.encode("utf-8") for item in items))
    return fnv1a_64(joined)


def _property_items(smap: SubjectMap, sid: int) -> list[str]:
    return [TAG_PROPERTY + smap.dct.decode(p).lexical for p in smap.property_set(sid)]


def _type_items(smap: SubjectMap, sid: int) -> list[str]:
    return [TAG_TYPE + smap.dct.decode(o).lexical for o in smap.type_set(sid)]


def _cc_hash(smap: SubjectMap, sid: int, cache: dict[int, int]) -> int:
    h = cache.get(sid)
    if h is None:
        h = canonical_hash(_type_items(smap, sid)) if sid in smap else EMPTY_CLASS
        cache[sid] = h
    return h


def _sx_items(
    smap: SubjectMap, sid: int, cc_cache: dict[int, int], multiset: bool
) -> list[str]:
    items = _type_items(smap, sid)
    neighbor_items = [
        TAG_NEIGHBOR + class_hex(_cc_hash(smap, n, cc_cache))
        for n in smap.ac_neighbors(sid)
    ]
    if not multiset:
        neighbor_items = list(dict.fromkeys(neighbor_items))
    return items + neighbor_items


def feature_list(
    model: SummaryModel,
    sid: int,
    smap: SubjectMap,
    sx_multiset: bool = False,
    _cc_cache: dict[int, int] | None = None,
) -> list[str]:
    """Tagged feature strings for one subject, in collection order.

    The list is unsorted; :func:`canonical_hash` sorts. For SX, neighbors
    absent from the map contribute the signature of an empty type set, and
    duplicate neighbor signatures collapse unless ``sx_multiset``.
    """
    if model is SummaryModel.AC:
        return _property_items(smap, sid)
    if model is SummaryModel.CC:
        return _type_items(smap, sid)
    if model is SummaryModel.PTC:
        return _property_items(smap, sid) + _type_items(smap, sid)
    if model is SummaryModel.SX:
        cache = _cc_cache if _cc_cache is not None else {}
        return _sx_items(smap, sid, cache, sx_multiset)
    raise ValueError(f"unknown summary model: {model}")


@dataclass
class SummaryResult:
    model: SummaryModel
    n_subjects: int
    class_counts: Counter

    @property
    def num_classes(self) -> int:
        return len(self.class_counts)


def summarize(
    model: SummaryModel, smap: SubjectMap, sx_multiset: bool = False
) -> SummaryResult:
    """Label every subject with its equivalence class.

    Labels are written into the SubjectInformation records; the result
    reports the class histogram.
    """
    cc_cache: dict[int, int] = {}
    counts: Counter = Counter()
    for sid, info in smap.subjects.items():
        items = feature_list(model, sid, smap, sx_multiset, _cc_cache=cc_cache)
        label = canonical_hash(items)
        info.label = label
        counts[label] += 1
    return SummaryResult(model, len(smap), counts)


def _check_subject_map(X) -> SubjectMap:
    if not isinstance(X, SubjectMap):
        raise TypeError(
            f"expected a SubjectMap, got {type(X).__name__}; build one with "
            "SubjectMap.build(ingest_file(path, dct), dct)"
        )
    return X


class GraphSummarizer(ClusterMixin, BaseEstimator):
    """Clusterer-style wrapper around :func:`summarize`.

    fit(X) takes a :class:`SubjectMap` and exposes the per-subject
    equivalence classes as ``labels_`` (uint64, in map order), so the
    summary composes with clustering-metric tooling.
    """

    def __init__(self, model: str = "ac", sx_multiset: bool = False):
        self.model = model
        self.sx_multiset = sx_multiset

    def fit(self, X, y=None):
        smap = _check_subject_map(X)
        result = summarize(SummaryModel(self.model), smap, self.sx_multiset)
        self.subjects_ = list(smap.subjects)
        self.labels_ = np.array(
            [smap.subjects[s].label for s in self.subjects_], dtype=np.uint64
        )
        self.class_counts_ = result.class_counts
        self.n_classes_ = result.num_classes
        return self

    def assignment(self) -> dict[int, int]:
        """Subject TermId -> equivalence class, for metric evaluation."""
        return {s: int(label) for s, label in zip(self.subjects_, self.labels_)}
