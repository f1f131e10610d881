"""Subject-indexed view of the encoded graph.

One SubjectInformation record per distinct subject holds its outgoing
(predicate, object) edges in file order, plus the equivalence-class label
and fold number once the later passes have run. Both the summarizers and
the batcher read this structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .ingest import EncodedTriple
from .terms import RDF_TYPE, TermDictionary

_MAGIC = b"SGSTORE1"


class UnknownSubject(KeyError):
    pass


@dataclass(slots=True)
class SubjectInformation:
    edges: list[tuple[int, int]] = field(default_factory=list)
    label: int | None = None
    fold: int | None = None


class SubjectMap:
    """Mapping subject TermId -> SubjectInformation, plus the dictionary.

    Immutable after build except for the exclusive label/fold assignment
    passes; any number of readers may then share it.
    """

    def __init__(self, dct: TermDictionary):
        self.dct = dct
        self.subjects: dict[int, SubjectInformation] = {}
        self.type_predicate: int | None = None

    @classmethod
    def build(cls, triples: Iterable[EncodedTriple], dct: TermDictionary) -> "SubjectMap":
        smap = cls(dct)
        subjects = smap.subjects
        for s, p, o in triples:
            info = subjects.get(s)
            if info is None:
                info = subjects[s] = SubjectInformation()
            info.edges.append((p, o))
        # Interned last so file terms keep their file-order ids.
        smap.type_predicate = dct.intern(RDF_TYPE)
        return smap

    def __len__(self) -> int:
        return len(self.subjects)

    def __contains__(self, sid: int) -> bool:
        return sid in self.subjects

    def __iter__(self) -> Iterator[int]:
        return iter(self.subjects)

    def get(self, sid: int) -> SubjectInformation:
        info = self.subjects.get(sid)
        if info is None:
            raise UnknownSubject(sid)
        return info

    @property
    def n_triples(self) -> int:
        return sum(len(si.edges) for si in self.subjects.values())

    def sort_key(self, tid: int) -> bytes:
        """Byte order of the term's serialized lexical form.

        Class hashes and artifact files sort on this, never on TermId, so
        results do not depend on interning order.
        """
        return self.dct.n3(tid).encode("utf-8")

    # -- neighborhood views ------------------------------------------------

    def property_set(self, sid: int) -> list[int]:
        """Deduplicated outgoing predicates except rdf:type, sorted."""
        info = self.get(sid)
        preds = {p for p, _ in info.edges if p != self.type_predicate}
        return sorted(preds, key=self.sort_key)

    def type_set(self, sid: int) -> list[int]:
        """Deduplicated objects of rdf:type edges, sorted."""
        info = self.get(sid)
        types = {o for p, o in info.edges if p == self.type_predicate}
        return sorted(types, key=self.sort_key)

    def ac_neighbors(self, sid: int) -> list[int]:
        """Objects over non-type edges, in edge order, duplicates kept."""
        info = self.get(sid)
        return [o for p, o in info.edges if p != self.type_predicate]

    # -- label / fold passes -------------------------------------------------

    def set_label(self, sid: int, label: int) -> None:
        self.get(sid).label = label

    def set_fold(self, sid: int, fold: int) -> None:
        self.get(sid).fold = fold

    # -- binary persistence ----------------------------------------------
    #
    # Layout: magic "SGSTORE1", varint subject count, then per subject
    # varint(subject id), varint(edge count), edge count pairs of
    # varint(predicate id), varint(object id). All varints are unsigned
    # LEB128. Labels and folds are separate artifacts.

    def save_bin(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            _write_varint(fh, len(self.subjects))
            for sid, info in self.subjects.items():
                _write_varint(fh, sid)
                _write_varint(fh, len(info.edges))
                for p, o in info.edges:
                    _write_varint(fh, p)
                    _write_varint(fh, o)

    @classmethod
    def load_bin(cls, path: str, dct: TermDictionary) -> "SubjectMap":
        smap = cls(dct)
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                raise ValueError(f"{path}: not a subject map file")
            n = _read_varint(fh)
            for _ in range(n):
                sid = _read_varint(fh)
                n_edges = _read_varint(fh)
                edges = [
                    (_read_varint(fh), _read_varint(fh)) for _ in range(n_edges)
                ]
                smap.subjects[sid] = SubjectInformation(edges=edges)
        smap.type_predicate = dct.intern(RDF_TYPE)
        return smap


def _write_varint(fh, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            fh.write(bytes((byte | 0x80,)))
        else:
            fh.write(bytes((byte,)))
            return


def _read_varint(fh) -> int:
    shift = 0
    value = 0
    while True:
        chunk = fh.read(1)
        if not chunk:
            raise EOFError("truncated varint")
        byte = chunk[0]
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value
        shift += 7
