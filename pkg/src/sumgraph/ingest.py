"""Streaming N-Triples / N-Quads ingestion.

Files are read line by line (optionally gzip-compressed, sniffed by magic
bytes) and dictionary-encoded on the fly, so peak memory tracks the term
dictionary, not the file. Web crawls contain dirt: the default policy
skips and counts malformed lines; ``strict`` aborts on the first one.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .terms import Term, TermDictionary, TermKind

_WS = " \t"


class MalformedLine(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EncodedTriple(NamedTuple):
    s: int
    p: int
    o: int


@dataclass
class IngestStats:
    triples: int = 0
    skipped: int = 0
    distinct_terms: int = 0
    _seen: set[int] = field(default_factory=set, repr=False)

    def _note_ids(self, *tids: int) -> None:
        self._seen.update(tids)
        self.distinct_terms = len(self._seen)


def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in _WS:
        pos += 1
    return pos


def _scan_iri(line: str, pos: int, line_no: int) -> tuple[Term, int]:
    end = line.find(">", pos + 1)
    if end < 0:
        raise MalformedLine(line_no, "unterminated IRI")
    lexical = line[pos + 1 : end]
    if not lexical:
        raise MalformedLine(line_no, "empty IRI")
    if any(c in _WS for c in lexical):
        raise MalformedLine(line_no, "whitespace inside IRI")
    return Term(TermKind.IRI, lexical), end + 1


def _scan_blank(line: str, pos: int, line_no: int) -> tuple[Term, int]:
    if not line.startswith("_:", pos):
        raise MalformedLine(line_no, "expected blank node label")
    end = pos + 2
    while end < len(line) and line[end] not in _WS:
        end += 1
    label = line[pos + 2 : end]
    # Lenient about a terminator glued to the label (`_:b.`): the dot is
    # handed back to the line parser.
    if label.endswith("."):
        label = label[:-1]
        end -= 1
    if not label:
        raise MalformedLine(line_no, "empty blank node label")
    return Term(TermKind.BLANK, label), end


def _scan_literal(line: str, pos: int, line_no: int) -> tuple[Term, int]:
    end = pos + 1
    while end < len(line):
        c = line[end]
        if c == "\\":
            end += 2
            continue
        if c == '"':
            break
        end += 1
    if end >= len(line):
        raise MalformedLine(line_no, "unterminated literal")
    end += 1  # past closing quote
    if line.startswith("^^", end):
        if not line.startswith("<", end + 2):
            raise MalformedLine(line_no, "datatype must be an IRI")
        close = line.find(">", end + 2)
        if close < 0:
            raise MalformedLine(line_no, "unterminated datatype IRI")
        end = close + 1
    elif line.startswith("@", end):
        while end < len(line) and line[end] not in _WS:
            end += 1
        if line[pos:end].endswith("."):
            end -= 1
    return Term(TermKind.LITERAL, line[pos:end]), end


def _scan_term(line: str, pos: int, line_no: int) -> tuple[Term, int]:
    c = line[pos]
    if c == "<":
        return _scan_iri(line, pos, line_no)
    if c == "_":
        return _scan_blank(line, pos, line_no)
    if c == '"':
        return _scan_literal(line, pos, line_no)
    raise MalformedLine(line_no, f"unexpected character {c!r}")


def parse_line(line: str, line_no: int = 0) -> tuple[Term, Term, Term] | None:
    """Parse one physical line; ``None`` for blank and comment lines.

    An N-Quads graph term, when present, is parsed and discarded.
    """
    line = line.rstrip("\r\n")
    pos = _skip_ws(line, 0)
    if pos >= len(line) or line[pos] == "#":
        return None

    terms: list[Term] = []
    while len(terms) < 4:
        pos = _skip_ws(line, pos)
        if pos >= len(line):
            raise MalformedLine(line_no, "line ends before '.'")
        if line[pos] == ".":
            pos += 1
            break
        term, pos = _scan_term(line, pos, line_no)
        terms.append(term)
    else:
        # four terms consumed; still need the terminator
        pos = _skip_ws(line, pos)
        if pos >= len(line) or line[pos] != ".":
            raise MalformedLine(line_no, "expected '.' after graph term")
        pos += 1

    if len(terms) < 3:
        raise MalformedLine(line_no, f"only {len(terms)} terms before '.'")
    pos = _skip_ws(line, pos)
    if pos < len(line) and line[pos] != "#":
        raise MalformedLine(line_no, "trailing garbage after '.'")

    s, p, o = terms[0], terms[1], terms[2]
    if s.is_literal():
        raise MalformedLine(line_no, "literal subject")
    if p.is_literal():
        raise MalformedLine(line_no, "literal predicate")
    return s, p, o


def open_maybe_gzip(path: str) -> io.TextIOBase:
    """Text handle over a plain or gzip file, sniffed by magic bytes."""
    raw = open(path, "rb")
    magic = raw.read(2)
    raw.seek(0)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8", errors="replace")
    return io.TextIOWrapper(raw, encoding="utf-8", errors="replace")


def ingest_file(
    path: str,
    dct: TermDictionary,
    stats: IngestStats | None = None,
    strict: bool = False,
) -> Iterator[EncodedTriple]:
    """Yield dictionary-encoded triples in file order.

    ``stats`` is updated in place as the stream is consumed; it is only
    complete once iteration ends. ``distinct_terms`` counts terms of this
    file even when ``dct`` is shared across files.
    """
    if stats is None:
        stats = IngestStats()
    with open_maybe_gzip(path) as fh:
        for line_no, line in enumerate(fh, 1):
            try:
                parsed = parse_line(line, line_no)
            except MalformedLine:
                if strict:
                    raise
                stats.skipped += 1
                continue
            if parsed is None:
                continue
            s, p, o = parsed
            triple = EncodedTriple(dct.intern(s), dct.intern(p), dct.intern(o))
            stats.triples += 1
            stats._note_ids(*triple)
            yield triple
