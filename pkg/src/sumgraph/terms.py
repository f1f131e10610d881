"""RDF terms and the interning dictionary.

A term is (kind, lexical). Lexical forms are kept verbatim: IRIs without
the surrounding angle brackets, blank node labels without the ``_:``
prefix, literals as the complete source token including quotes and any
datatype/language suffix. Equality is byte equality on (kind, lexical);
no normalization is ever applied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

MAX_TERM_ID = 2**32


class TermKind(enum.Enum):
    IRI = "iri"
    BLANK = "blank"
    LITERAL = "literal"


@dataclass(frozen=True, slots=True)
class Term:
    kind: TermKind
    lexical: str

    def n3(self) -> str:
        """Self-describing serialization (kind is recoverable)."""
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        return self.lexical

    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL


def term_from_n3(text: str) -> Term:
    """Inverse of :meth:`Term.n3`."""
    if text.startswith("<") and text.endswith(">"):
        return Term(TermKind.IRI, text[1:-1])
    if text.startswith("_:"):
        return Term(TermKind.BLANK, text[2:])
    if text.startswith('"'):
        return Term(TermKind.LITERAL, text)
    raise ValueError(f"not an N-Triples term: {text!r}")


RDF_TYPE = Term(TermKind.IRI, "http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


class DictionaryFull(RuntimeError):
    """Raised when the 32-bit TermId space is exhausted."""


class TermDictionary:
    """Bijective Term <-> dense integer id mapping.

    Ids are assigned in first-seen order starting at 0, so they depend on
    input order; anything that must be reorder-invariant works with
    lexical forms instead.
    """

    def __init__(self) -> None:
        self._ids: dict[Term, int] = {}
        self._terms: list[Term] = []

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, term: Term) -> bool:
        return term in self._ids

    def intern(self, term: Term) -> int:
        tid = self._ids.get(term)
        if tid is not None:
            return tid
        if len(self._terms) >= MAX_TERM_ID:
            raise DictionaryFull(f"term id space exhausted at {MAX_TERM_ID}")
        tid = len(self._terms)
        self._ids[term] = tid
        self._terms.append(term)
        return tid

    def lookup(self, term: Term) -> int | None:
        return self._ids.get(term)

    def decode(self, tid: int) -> Term:
        return self._terms[tid]

    def n3(self, tid: int) -> str:
        return self._terms[tid].n3()

    # -- persistence: two-column TSV (id, escaped n3 form) ----------------

    @staticmethod
    def _escape(text: str) -> str:
        return (
            text.replace("\\", "\\\\")
            .replace("\t", "\\t")
            .replace("\n", "\\n")
            .replace("\r", "\\r")
        )

    @staticmethod
    def _unescape(text: str) -> str:
        out: list[str] = []
        i = 0
        while i < len(text):
            c = text[i]
            if c == "\\" and i + 1 < len(text):
                nxt = text[i + 1]
                out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
                i += 2
            else:
                out.append(c)
                i += 1
        return "".join(out)

    def save_tsv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for tid, term in enumerate(self._terms):
                fh.write(f"{tid}\t{self._escape(term.n3())}\n")

    @classmethod
    def load_tsv(cls, path: str) -> "TermDictionary":
        dct = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tid_text, escaped = line.rstrip("\n").split("\t", 1)
                term = term_from_n3(cls._unescape(escaped))
                assigned = dct.intern(term)
                if assigned != int(tid_text):
                    raise ValueError(
                        f"dictionary file not dense/ordered at id {tid_text}"
                    )
        return dct
