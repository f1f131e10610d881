import gzip
import tracemalloc

import numpy as np
import pytest

from sumgraph.ingest import IngestStats, MalformedLine, ingest_file, parse_line
from sumgraph.terms import TermDictionary, TermKind

from conftest import random_triples, triples_to_ntriples


# -- parse_line ---------------------------------------------------------------


def test_minimal_triple():
    s, p, o = parse_line("<http://a> <http://p> <http://b> .")
    assert (s.kind, s.lexical) == (TermKind.IRI, "http://a")
    assert (p.kind, p.lexical) == (TermKind.IRI, "http://p")
    assert (o.kind, o.lexical) == (TermKind.IRI, "http://b")


def test_each_term_kind():
    s, p, o = parse_line('_:b1 <http://p> "lit"^^<http://dt> .')
    assert (s.kind, s.lexical) == (TermKind.BLANK, "b1")
    assert p.kind is TermKind.IRI
    assert (o.kind, o.lexical) == (TermKind.LITERAL, '"lit"^^<http://dt>')


def test_comment_and_blank_lines():
    assert parse_line("# comment") is None
    assert parse_line("") is None
    assert parse_line("   \t ") is None
    assert parse_line("   # indented comment") is None


def test_quad_graph_term_discarded():
    s, p, o = parse_line("<http://a> <http://p> <http://b> <http://graph> .")
    assert o.lexical == "http://b"


def test_language_tag_and_escapes():
    _, _, o = parse_line('<http://a> <http://p> "hi \\"there\\""@en .')
    assert o.lexical == '"hi \\"there\\""@en'


def test_malformed_lines():
    for line in (
        "<http://a> <http://p> .",  # two terms
        "<http://a> <http://p> <http://b>",  # missing dot
        '"lit" <http://p> <http://b> .',  # literal subject
        "<http://a> \"lit\" <http://b> .",  # literal predicate
        "<http://a <http://p> <http://b> .",  # unterminated IRI
        "<http://a> <http://p> <http://b> . trailing",
        "<http://a> <http://p> <http://b> <http://g> extra .",
    ):
        with pytest.raises(MalformedLine):
            parse_line(line, line_no=7)


def test_malformed_line_carries_line_number():
    with pytest.raises(MalformedLine) as exc:
        parse_line("junk", line_no=42)
    assert exc.value.line_no == 42


def test_trailing_comment_allowed():
    assert parse_line("<http://a> <http://p> <http://b> . # note") is not None


# -- ingest_file -------------------------------------------------------------


def _write(tmp_path, text, name="data.nt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_empty_file(tmp_path):
    path = _write(tmp_path, "")
    dct = TermDictionary()
    stats = IngestStats()
    assert list(ingest_file(path, dct, stats)) == []
    assert (stats.triples, stats.skipped, stats.distinct_terms) == (0, 0, 0)


def test_three_triples_one_comment(tmp_path):
    text = (
        "<http://a> <http://p> <http://b> .\n"
        "# comment\n"
        "<http://a> <http://q> <http://c> .\n"
        "<http://b> <http://p> <http://a> .\n"
    )
    dct = TermDictionary()
    stats = IngestStats()
    triples = list(ingest_file(_write(tmp_path, text), dct, stats))
    assert len(triples) == 3
    assert stats.triples == 3
    assert stats.skipped == 0


def test_skip_and_count_vs_strict(tmp_path):
    text = "<http://a> <http://p> <http://b> .\nbroken line\n"
    path = _write(tmp_path, text)
    stats = IngestStats()
    assert len(list(ingest_file(path, TermDictionary(), stats))) == 1
    assert stats.skipped == 1
    with pytest.raises(MalformedLine):
        list(ingest_file(path, TermDictionary(), strict=True))


def test_order_preservation(tmp_path):
    rng = np.random.default_rng(3)
    triples = random_triples(rng, n_subjects=20)
    path = _write(tmp_path, triples_to_ntriples(triples))
    dct = TermDictionary()
    out = list(ingest_file(path, dct))
    assert [
        (dct.decode(t.s), dct.decode(t.p), dct.decode(t.o)) for t in out
    ] == triples


def test_distinct_terms_against_set_scan_oracle(tmp_path):
    # Independent oracle: a second pass collecting terms into a plain set.
    rng = np.random.default_rng(7)
    triples = random_triples(rng, n_subjects=900, max_edges=25)
    assert len(triples) >= 10_000
    path = _write(tmp_path, triples_to_ntriples(triples))

    oracle_terms = set()
    for s, p, o in triples:
        oracle_terms.update((s, p, o))

    stats = IngestStats()
    list(ingest_file(path, TermDictionary(), stats))
    assert stats.distinct_terms == len(oracle_terms)


def test_distinct_terms_counts_per_file_with_shared_dict(tmp_path):
    text = "<http://a> <http://p> <http://b> .\n"
    p1 = _write(tmp_path, text, "one.nt")
    p2 = _write(tmp_path, text, "two.nt")
    dct = TermDictionary()
    list(ingest_file(p1, dct))
    stats2 = IngestStats()
    list(ingest_file(p2, dct, stats2))
    assert stats2.distinct_terms == 3  # all terms already interned, still counted


def test_gzip_sniffing(tmp_path):
    text = "<http://a> <http://p> <http://b> .\n"
    path = tmp_path / "data.nt.gz"
    path.write_bytes(gzip.compress(text.encode("utf-8")))
    triples = list(ingest_file(str(path), TermDictionary()))
    assert len(triples) == 1


def test_streaming_memory_bounded_by_dictionary(tmp_path):
    # Few distinct terms repeated over a file much larger than the peak
    # allocation we allow: memory must track the dictionary, not the file.
    line = "<http://ex/subject> <http://ex/predicate> <http://ex/object> .\n"
    n_lines = 120_000
    path = _write(tmp_path, line * n_lines)
    file_size = len(line) * n_lines
    assert file_size > 5_000_000

    dct = TermDictionary()
    tracemalloc.start()
    count = sum(1 for _ in ingest_file(path, dct))
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    assert count == n_lines
    assert len(dct) == 3
    assert peak < file_size / 4
