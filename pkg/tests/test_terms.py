import pytest
from hypothesis import given
from hypothesis import strategies as st

import sumgraph.terms as terms_mod
from sumgraph.terms import DictionaryFull, Term, TermDictionary, TermKind, term_from_n3

from conftest import blank, iri, literal


def test_equality_is_kind_and_lexical():
    assert iri("http://a") == iri("http://a")
    assert iri("http://a") != blank("http://a")
    assert literal('"x"') != literal('"x"@en')


def test_n3_round_trip_each_kind():
    for term in (iri("http://a"), blank("b1"), literal('"lit"^^<http://dt>')):
        assert term_from_n3(term.n3()) == term


iris = st.text(
    st.characters(blacklist_characters="<> \t\n\r", min_codepoint=33), min_size=1
).map(iri)
blanks = st.text(st.characters(blacklist_characters=" \t\n\r", min_codepoint=33), min_size=1).map(blank)
literals = st.text(st.characters(blacklist_characters='"\n\r', min_codepoint=32)).map(
    lambda t: literal(f'"{t}"')
)


@given(st.one_of(iris, blanks, literals))
def test_n3_round_trip_property(term):
    assert term_from_n3(term.n3()) == term


@given(st.lists(st.one_of(iris, blanks, literals), min_size=1))
def test_intern_decode_round_trip(terms):
    dct = TermDictionary()
    for term in terms:
        assert dct.decode(dct.intern(term)) == term


def test_intern_idempotent_and_dense():
    dct = TermDictionary()
    a = iri("http://a")
    assert dct.intern(a) == 0
    assert dct.intern(a) == 0
    assert dct.intern(iri("http://b")) == 1
    assert len(dct) == 2


def test_intern_hundred_distinct_terms_ids_are_exactly_range():
    dct = TermDictionary()
    ids = {dct.intern(iri(f"http://ex/t{i}")) for i in range(100)}
    assert ids == set(range(100))


def test_dictionary_full(monkeypatch):
    monkeypatch.setattr(terms_mod, "MAX_TERM_ID", 2)
    dct = TermDictionary()
    dct.intern(iri("http://a"))
    dct.intern(iri("http://b"))
    with pytest.raises(DictionaryFull):
        dct.intern(iri("http://c"))


def test_tsv_round_trip(tmp_path):
    dct = TermDictionary()
    for term in (
        iri("http://a"),
        blank("b1"),
        literal('"has\ttab and \\ backslash"'),
        literal('"plain"@en'),
    ):
        dct.intern(term)
    path = str(tmp_path / "dict.tsv")
    dct.save_tsv(path)
    loaded = TermDictionary.load_tsv(path)
    assert len(loaded) == len(dct)
    for tid in range(len(dct)):
        assert loaded.decode(tid) == dct.decode(tid)


def test_rdf_type_constant():
    assert terms_mod.RDF_TYPE.kind is TermKind.IRI
    assert terms_mod.RDF_TYPE.lexical.endswith("#type")
