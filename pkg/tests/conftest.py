"""Shared builders for synthetic graphs and term triples."""

from __future__ import annotations

import numpy as np
import pytest

from sumgraph.ingest import EncodedTriple
from sumgraph.store import SubjectMap
from sumgraph.terms import RDF_TYPE, Term, TermDictionary, TermKind

TYPE_IRI = RDF_TYPE.lexical


def iri(text: str) -> Term:
    return Term(TermKind.IRI, text)


def blank(label: str) -> Term:
    return Term(TermKind.BLANK, label)


def literal(token: str) -> Term:
    return Term(TermKind.LITERAL, token)


def build_map(triples: list[tuple[Term, Term, Term]]) -> SubjectMap:
    """SubjectMap straight from term triples, bypassing file parsing."""
    dct = TermDictionary()
    encoded = [
        EncodedTriple(dct.intern(s), dct.intern(p), dct.intern(o))
        for s, p, o in triples
    ]
    return SubjectMap.build(encoded, dct)


def triples_to_ntriples(triples: list[tuple[Term, Term, Term]]) -> str:
    return "".join(f"{s.n3()} {p.n3()} {o.n3()} .\n" for s, p, o in triples)


def random_triples(
    rng: np.random.Generator,
    n_subjects: int = 50,
    n_predicates: int = 10,
    n_types: int = 5,
    max_edges: int = 8,
    p_type: float = 0.3,
    p_subject_object: float = 0.5,
) -> list[tuple[Term, Term, Term]]:
    """Random multigraph over a small vocabulary; objects may be subjects."""
    subjects = [iri(f"http://ex/s{i}") for i in range(n_subjects)]
    predicates = [iri(f"http://ex/p{i}") for i in range(n_predicates)]
    types = [iri(f"http://ex/C{i}") for i in range(n_types)]
    triples = []
    for s in subjects:
        for _ in range(int(rng.integers(1, max_edges + 1))):
            if rng.random() < p_type:
                triples.append((s, RDF_TYPE, types[rng.integers(n_types)]))
            elif rng.random() < p_subject_object:
                triples.append(
                    (s, predicates[rng.integers(n_predicates)], subjects[rng.integers(n_subjects)])
                )
            else:
                o = iri(f"http://ex/o{rng.integers(2 * n_subjects)}")
                triples.append((s, predicates[rng.integers(n_predicates)], o))
    return triples


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
