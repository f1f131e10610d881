"""Equivalence-class graph summaries of RDF graphs.

Exact summaries via sort-concatenate-hash, an order-invariant Bloom-filter
approximation, clustering quality metrics, and a deterministic mini-batch
export pipeline for neural baselines.
"""

from .bloom import BloomFilter, BloomParams, BloomSummarizer, bloom_class, params_from
from .ingest import EncodedTriple, IngestStats, MalformedLine, ingest_file, parse_line
from .metrics import Clustering, ImpurityReport, class_stats, evaluate
from .store import SubjectInformation, SubjectMap, UnknownSubject
from .summaries import (
    EMPTY_CLASS,
    GraphSummarizer,
    SummaryModel,
    canonical_hash,
    feature_list,
    summarize,
)
from .terms import Term, TermDictionary, TermKind

__all__ = [
    "BloomFilter",
    "BloomParams",
    "BloomSummarizer",
    "Clustering",
    "EMPTY_CLASS",
    "EncodedTriple",
    "GraphSummarizer",
    "ImpurityReport",
    "IngestStats",
    "MalformedLine",
    "SubjectInformation",
    "SubjectMap",
    "SummaryModel",
    "Term",
    "TermDictionary",
    "TermKind",
    "UnknownSubject",
    "bloom_class",
    "canonical_hash",
    "class_stats",
    "evaluate",
    "feature_list",
    "ingest_file",
    "params_from",
    "parse_line",
    "summarize",
]

__version__ = "0.1.0"
