"""Fold splitting, dataset filters, subgraph conversion, and batch export.

Every per-subject random decision (fold, subsample) is a pure function of
the subject's lexical form and the run seed, and every ordering that
reaches an output file is keyed to lexical byte order, so a reordered copy
of the input produces byte-identical batch files under the same seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hashing import keyed_hash
from .store import SubjectMap
from .summaries import SummaryModel, class_hex

BATCH_HEADER = "SUMGRAPH-BATCH v1"

_FOLD_SALT = 0x464F4C44  # "FOLD"
_SAMPLE_SALT = 0x53414D50  # "SAMP"
_TWO64 = float(2**64)


class EmptyFoldset(ValueError):
    pass


class UnlabeledSubject(ValueError):
    pass


# -- fold assignment ---------------------------------------------------------


def fold_of(subject_n3: str, seed: int, folds: int = 10) -> int:
    return keyed_hash(subject_n3.encode("utf-8"), seed ^ _FOLD_SALT) % folds


def split_folds(smap: SubjectMap, seed: int, folds: int = 10) -> dict[int, int]:
    """Assign every subject a fold, written into the map and returned."""
    assignment: dict[int, int] = {}
    for sid, info in smap.subjects.items():
        fold = fold_of(smap.dct.n3(sid), seed, folds)
        info.fold = fold
        assignment[sid] = fold
    return assignment


# -- dataset filters ---------------------------------------------------------


@dataclass
class MinSupportReport:
    threshold: int
    subjects_before: int
    subjects_after: int
    classes_before: int
    classes_after: int


def filter_min_support(
    smap: SubjectMap, threshold: int, candidates: Sequence[int] | None = None
) -> tuple[list[int], MinSupportReport]:
    """Keep subjects whose class occurs at least ``threshold`` times.

    Counts are taken over the candidate set itself. Subjects must be
    labeled.
    """
    subjects = list(candidates) if candidates is not None else list(smap.subjects)
    counts: dict[int, int] = {}
    for sid in subjects:
        label = smap.get(sid).label
        if label is None:
            raise UnlabeledSubject(smap.dct.n3(sid))
        counts[label] = counts.get(label, 0) + 1
    kept = [sid for sid in subjects if counts[smap.get(sid).label] >= threshold]
    kept_classes = {smap.get(sid).label for sid in kept}
    return kept, MinSupportReport(
        threshold=threshold,
        subjects_before=len(subjects),
        subjects_after=len(kept),
        classes_before=len(counts),
        classes_after=len(kept_classes),
    )


def subgraph_node_count(sid: int, model: SummaryModel, smap: SubjectMap) -> int:
    """Node count of the subgraph data_conversion would emit."""
    info = smap.get(sid)
    objects = {o for _, o in info.edges}
    nodes = {sid} | objects
    if model.hops == 2:
        for o in objects:
            if o != sid and o in smap:
                nodes.update(o2 for _, o2 in smap.get(o).edges)
    return len(nodes)


def filter_subgraph_size(
    smap: SubjectMap,
    model: SummaryModel,
    max_nodes: int,
    candidates: Sequence[int] | None = None,
) -> list[int]:
    """Drop subjects whose subgraph would reach ``max_nodes`` nodes."""
    subjects = candidates if candidates is not None else list(smap.subjects)
    return [
        sid for sid in subjects if subgraph_node_count(sid, model, smap) < max_nodes
    ]


def subsample_fraction(
    smap: SubjectMap,
    fraction: float,
    seed: int,
    candidates: Sequence[int] | None = None,
) -> list[int]:
    """Seeded per-subject Bernoulli(fraction) keep decision."""
    subjects = candidates if candidates is not None else list(smap.subjects)
    return [
        sid
        for sid in subjects
        if keyed_hash(smap.dct.n3(sid).encode("utf-8"), seed ^ _SAMPLE_SALT) / _TWO64
        < fraction
    ]


# -- label map and class weights ----------------------------------------------


def build_label_map(smap: SubjectMap, subjects: Iterable[int]) -> dict[int, int]:
    """Dense class index per equivalence class, ordered by class hash."""
    classes = set()
    for sid in subjects:
        label = smap.get(sid).label
        if label is None:
            raise UnlabeledSubject(smap.dct.n3(sid))
        classes.add(label)
    return {label: idx for idx, label in enumerate(sorted(classes))}


def inverse_class_weights(smap: SubjectMap, subjects: Iterable[int]) -> dict[int, float]:
    """Weight 1/count per class, counted over the given subjects only.

    Feed training-fold subjects here; computing on evaluation folds would
    leak their class frequencies.
    """
    counts: dict[int, int] = {}
    for sid in subjects:
        label = smap.get(sid).label
        counts[label] = counts.get(label, 0) + 1
    return {label: 1.0 / count for label, count in counts.items()}


# -- subgraph conversion -------------------------------------------------------


@dataclass
class GraphData:
    """One root-centered subgraph.

    Node indices are local, root at 0; edges keep the direction of the
    underlying triples; ``edge_types`` is parallel to ``edges`` and holds
    predicate TermIds. Only the root carries a class index, every other
    node is labeled -1.
    """

    n_nodes: int
    root_index: int
    labels: list[int]
    edges: list[tuple[int, int]]
    edge_types: list[int]
    #: TermId per node index; in-memory metadata, not exported
    node_ids: list[int] = field(default_factory=list)


def _canonical_edges(smap: SubjectMap, sid: int) -> list[tuple[int, int]]:
    # Sorted by lexical form, not file order: batch files must not depend
    # on the order triples appeared in the input.
    return sorted(
        smap.get(sid).edges,
        key=lambda e: (smap.sort_key(e[0]), smap.sort_key(e[1])),
    )


def data_conversion(
    sid: int,
    model: SummaryModel,
    smap: SubjectMap,
    label_map: Mapping[int, int],
) -> GraphData:
    """Subject record -> subgraph, 1 hop deep, or 2 for a 2-hop model.

    Node indices are assigned in first-encounter order over the canonical
    edge ordering; a duplicate object maps to one node. For 2-hop models
    every distinct object that is itself a subject contributes its own
    edges once.
    """
    info = smap.get(sid)
    if info.label is None:
        raise UnlabeledSubject(smap.dct.n3(sid))
    if info.label not in label_map:
        raise ValueError(
            f"class {class_hex(info.label)} of {smap.dct.n3(sid)} not in label map"
        )

    index = {sid: 0}
    nodes = [sid]

    def node_of(tid: int) -> int:
        idx = index.get(tid)
        if idx is None:
            idx = len(nodes)
            index[tid] = idx
            nodes.append(tid)
        return idx

    edges: list[tuple[int, int]] = []
    edge_types: list[int] = []
    for p, o in _canonical_edges(smap, sid):
        edges.append((0, node_of(o)))
        edge_types.append(p)

    if model.hops == 2:
        for o in list(nodes[1:]):
            if o not in smap:
                continue
            src = index[o]
            for p, o2 in _canonical_edges(smap, o):
                edges.append((src, node_of(o2)))
                edge_types.append(p)

    labels = [-1] * len(nodes)
    labels[0] = label_map[info.label]
    return GraphData(
        n_nodes=len(nodes),
        root_index=0,
        labels=labels,
        edges=edges,
        edge_types=edge_types,
        node_ids=nodes,
    )


# -- mini-batch assembly --------------------------------------------------------


@dataclass
class MiniBatch:
    """Fixed-size batch: subgraphs then isolated label--1 dummy nodes.

    Real and dummy node counts always add up to ``guard``. The per-node
    one-hot feature encoding is implicit: node i of the batch is basis
    vector i of dimension guard, so files stay small and the consumer
    rebuilds the identity matrix.
    """

    guard: int
    graphs: list[GraphData] = field(default_factory=list)
    dummy_count: int = 0
    #: root subject TermId per graph; in-memory metadata, not exported
    subject_ids: list[int] = field(default_factory=list)

    @property
    def real_nodes(self) -> int:
        return self.guard - self.dummy_count

    def node_labels(self) -> list[int]:
        labels: list[int] = []
        for g in self.graphs:
            labels.extend(g.labels)
        labels.extend([-1] * self.dummy_count)
        return labels

    def root_indices(self) -> list[int]:
        """Within-batch node index of each subgraph root."""
        roots = []
        offset = 0
        for g in self.graphs:
            roots.append(offset + g.root_index)
            offset += g.n_nodes
        return roots


class BatchSampler:
    """Seeded sequential stream of mini-batches over a candidate foldset.

    Each draw picks a candidate with probability proportional to the class
    weight (uniform when none are given) and appends its subgraph while
    the running node count plus the sample's node count stays strictly
    below the guard; the first draw that fails the test is discarded and
    the batch is padded with dummies. Same seed, same candidate list, same
    batch sequence.
    """

    def __init__(
        self,
        candidates: Sequence[int],
        model: SummaryModel,
        smap: SubjectMap,
        label_map: Mapping[int, int],
        guard: int,
        seed: int | np.random.Generator,
        class_weights: Mapping[int, float] | None = None,
    ):
        if len(candidates) == 0:
            raise EmptyFoldset("no subjects to sample from")
        self.candidates = list(candidates)
        self.model = model
        self.smap = smap
        self.label_map = label_map
        self.guard = guard
        if isinstance(seed, np.random.Generator):
            self.rng = seed
        else:
            self.rng = np.random.default_rng(seed)
        if class_weights is None:
            weights = np.ones(len(self.candidates))
        else:
            weights = np.array(
                [class_weights[smap.get(sid).label] for sid in self.candidates]
            )
        self._probs = weights / weights.sum()
        self._cache: dict[int, GraphData] = {}

    def _convert(self, sid: int) -> GraphData:
        g = self._cache.get(sid)
        if g is None:
            g = data_conversion(sid, self.model, self.smap, self.label_map)
            self._cache[sid] = g
        return g

    def _draw(self) -> tuple[int, GraphData]:
        i = int(self.rng.choice(len(self.candidates), p=self._probs))
        sid = self.candidates[i]
        return sid, self._convert(sid)

    def next_batch(self) -> MiniBatch:
        graphs: list[GraphData] = []
        subject_ids: list[int] = []
        total = 0
        sid, sample = self._draw()
        while total + sample.n_nodes < self.guard:
            graphs.append(sample)
            subject_ids.append(sid)
            total += sample.n_nodes
            sid, sample = self._draw()
        return MiniBatch(
            guard=self.guard,
            graphs=graphs,
            dummy_count=self.guard - total,
            subject_ids=subject_ids,
        )


def create_mini_batch(
    candidates: Sequence[int],
    model: SummaryModel,
    smap: SubjectMap,
    label_map: Mapping[int, int],
    guard: int,
    rng: int | np.random.Generator,
    class_weights: Mapping[int, float] | None = None,
) -> MiniBatch:
    """One batch via a throwaway :class:`BatchSampler`."""
    return BatchSampler(
        candidates, model, smap, label_map, guard, rng, class_weights
    ).next_batch()


# -- batch files and manifest -----------------------------------------------
#
# One file per batch: the header line "SUMGRAPH-BATCH v1" followed by a
# single JSON object {guard, graphs, dummy_count, config}. Each graph is
# {root, n_nodes, labels, edges:[[src, dst, ptype], ...]} with local node
# indices and ptype an index into the manifest's edge_types catalog.
# Extra keys must be ignored by readers.


def edge_type_catalog(smap: SubjectMap) -> list[int]:
    """All predicate TermIds of the map, ordered by lexical form."""
    predicates = {p for si in smap.subjects.values() for p, _ in si.edges}
    return sorted(predicates, key=smap.sort_key)


def batch_file_text(
    batch: MiniBatch, etype_pos: Mapping[int, int], config_hash: str
) -> str:
    graphs = [
        {
            "root": g.root_index,
            "n_nodes": g.n_nodes,
            "labels": g.labels,
            "edges": [
                [src, dst, etype_pos[t]]
                for (src, dst), t in zip(g.edges, g.edge_types)
            ],
        }
        for g in batch.graphs
    ]
    obj = {
        "guard": batch.guard,
        "graphs": graphs,
        "dummy_count": batch.dummy_count,
        "config": config_hash,
    }
    return BATCH_HEADER + "\n" + json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


@dataclass
class LoadedGraph:
    root: int
    n_nodes: int
    labels: list[int]
    edges: list[tuple[int, int, int]]  # (src, dst, edge type index)


@dataclass
class LoadedBatch:
    guard: int
    graphs: list[LoadedGraph]
    dummy_count: int
    config: str


def read_batch_file(path: str) -> LoadedBatch:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != BATCH_HEADER:
            raise ValueError(f"{path}: bad header {header!r}")
        obj = json.loads(fh.read())
    graphs = [
        LoadedGraph(
            root=g["root"],
            n_nodes=g["n_nodes"],
            labels=list(g["labels"]),
            edges=[tuple(e) for e in g["edges"]],
        )
        for g in obj["graphs"]
    ]
    return LoadedBatch(
        guard=obj["guard"],
        graphs=graphs,
        dummy_count=obj["dummy_count"],
        config=obj.get("config", ""),
    )


def export_batches(
    out_dir: str,
    sampler: BatchSampler,
    count: int,
    manifest_extra: Mapping | None = None,
    config_hash: str = "0" * 16,
) -> list[str]:
    """Write ``count`` batch files plus manifest.json; returns file paths."""
    os.makedirs(out_dir, exist_ok=True)
    catalog = edge_type_catalog(sampler.smap)
    etype_pos = {tid: i for i, tid in enumerate(catalog)}
    paths = []
    for i in range(count):
        batch = sampler.next_batch()
        path = os.path.join(out_dir, f"batch-{i:05d}.sgb")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(batch_file_text(batch, etype_pos, config_hash))
        paths.append(path)

    manifest = {
        "format": BATCH_HEADER,
        "model": sampler.model.value,
        "guard": sampler.guard,
        "count": count,
        "num_classes": len(sampler.label_map),
        "label_map": {
            class_hex(label): idx for label, idx in sorted(sampler.label_map.items())
        },
        "edge_types": [sampler.smap.dct.n3(tid) for tid in catalog],
        "config": config_hash,
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def read_manifest(out_dir: str) -> dict:
    with open(os.path.join(out_dir, "manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)


def batch_files(out_dir: str) -> list[str]:
    return sorted(
        os.path.join(out_dir, name)
        for name in os.listdir(out_dir)
        if name.startswith("batch-") and name.endswith(".sgb")
    )
