"""Corpus ingestion: genre-specific preprocessing, sentence splitting, tokenization.

Documents arrive as JSON Lines records with exactly the keys ``id``, ``genre``
("news" or "forum") and ``text``.  Forum documents get quote spans removed and
mixed-case tokens normalized; news documents pass through unchanged.
"""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

GENRES = ("news", "forum")

_PUNCT = set(string.punctuation)

def _load_abbreviations() -> tuple[str, ...]:
    path = Path(__file__).parent / "data" / "abbreviations.txt"
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
        return tuple(l.strip() for l in lines if l.strip())
    except OSError:
        return ("Dr.", "Mr.", "Mrs.", "Ms.", "Inc.", "Corp.", "Co.", "U.S.", "St.")


# Periods after these never end a sentence.
DEFAULT_ABBREVIATIONS = _load_abbreviations()

_QUOTE_TAG_RE = re.compile(r"</?quote>")
_SENT_END = set(".!?")
_CLOSERS = set("\"')]}”’")


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass(frozen=True)
class Document:
    id: str
    genre: str
    raw_text: str
    sentences: tuple[Sentence, ...]


class DocumentStore:
    """Immutable-after-ingestion collection of documents, keyed by id."""

    def __init__(self, documents: list[Document] | None = None,
                 errors: list[str] | None = None):
        self._docs: dict[str, Document] = {}
        self.errors: list[str] = list(errors or [])
        for doc in documents or []:
            self.add(doc)

    def add(self, doc: Document) -> None:
        if doc.id in self._docs:
            raise ValueError(f"duplicate document id: {doc.id!r}")
        self._docs[doc.id] = doc

    def get(self, doc_id: str) -> Document:
        return self._docs[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self):
        return iter(self._docs.values())

    @property
    def doc_ids(self) -> list[str]:
        return list(self._docs.keys())


def strip_quote_spans(text: str) -> tuple[str, list[int], list[str]]:
    """Remove ``<quote>...</quote>`` spans (nested pairs included).

    Returns the cleaned text, a map from cleaned-text index to original index,
    and any warnings.  An unclosed ``<quote>`` drops everything from the tag to
    the end of the text; an orphan ``</quote>`` is dropped by itself.
    """
    kept_spans: list[tuple[int, int]] = []
    warnings: list[str] = []
    depth = 0
    segment_start = 0
    for m in _QUOTE_TAG_RE.finditer(text):
        if m.group() == "<quote>":
            if depth == 0:
                kept_spans.append((segment_start, m.start()))
            depth += 1
        else:
            if depth == 0:
                warnings.append(f"orphan </quote> at offset {m.start()}")
                kept_spans.append((segment_start, m.start()))
                segment_start = m.end()
            else:
                depth -= 1
                if depth == 0:
                    segment_start = m.end()
    if depth > 0:
        warnings.append("unclosed <quote> tag; dropped through end of document")
    else:
        kept_spans.append((segment_start, len(text)))

    pieces = []
    char_map: list[int] = []
    for start, end in kept_spans:
        pieces.append(text[start:end])
        char_map.extend(range(start, end))
    return "".join(pieces), char_map, warnings


def normalize_case(token_text: str) -> str:
    """Lowercase a token iff it has an uppercase letter past position 0 and is
    not all-uppercase ("sErVice" -> "service"; "NASA", "Service" unchanged)."""
    if token_text.isupper():
        return token_text
    if any(c.isupper() for c in token_text[1:]):
        return token_text.lower()
    return token_text


def split_sentences(text: str, genre: str = "news",
                    abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS,
                    ) -> list[tuple[int, int]]:
    """Split text into sentence spans (character offsets, trimmed to content).

    A sentence ends at ``. ! ?`` (plus trailing closers) followed by
    whitespace, unless the period closes a known abbreviation.  Forum text
    additionally breaks at hard newlines.
    """
    abbrev = {a.lower() for a in abbreviations}
    boundaries = [0]
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if genre == "forum" and ch == "\n":
            boundaries.append(i + 1)
            i += 1
            continue
        if ch in _SENT_END:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if j >= n or text[j].isspace():
                if ch == "." and _is_abbreviation(text, i, abbrev):
                    i += 1
                    continue
                boundaries.append(j)
                i = j
                continue
        i += 1
    if boundaries[-1] != n:
        boundaries.append(n)

    spans = []
    for start, end in zip(boundaries, boundaries[1:]):
        s, e = _trim(text, start, end)
        if s < e:
            spans.append((s, e))
    return spans


def _is_abbreviation(text: str, period_idx: int, abbrev: set[str]) -> bool:
    start = period_idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:period_idx + 1]
    return word.lower() in abbrev


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def tokenize(sentence_text: str) -> list[Token]:
    """Whitespace-split, then peel leading/trailing punctuation and split
    possessive "'s".  Hyphenated words and dotted abbreviations stay whole.

    Offsets are relative to ``sentence_text``.
    """
    tokens: list[Token] = []
    for m in re.finditer(r"\S+", sentence_text):
        start, end = m.start(), m.end()
        while end - start > 1 and sentence_text[start] in _PUNCT:
            tokens.append(Token(sentence_text[start], start, start + 1))
            start += 1
        trailing: list[Token] = []
        while end - start > 1 and sentence_text[end - 1] in _PUNCT:
            # keep a final period that closes an internal-dot abbreviation
            if (sentence_text[end - 1] == "."
                    and "." in sentence_text[start:end - 1]):
                break
            trailing.append(Token(sentence_text[end - 1], end - 1, end))
            end -= 1
        core = sentence_text[start:end]
        if len(core) > 2 and core[-2:].lower() == "'s":
            tokens.append(Token(core[:-2], start, end - 2))
            tokens.append(Token(core[-2:], end - 2, end))
        elif core:
            tokens.append(Token(core, start, end))
        tokens.extend(reversed(trailing))
    return tokens


def make_document(doc_id: str, genre: str, text: str) -> Document:
    """Build a preprocessed, sentence-split, tokenized document."""
    if genre not in GENRES:
        raise ValueError(f"unknown genre {genre!r} for document {doc_id!r}")
    if not doc_id:
        raise ValueError("document id must be nonempty")

    if genre == "forum":
        clean, char_map, warnings = strip_quote_spans(text)
        for w in warnings:
            log.warning("%s: %s", doc_id, w)
    else:
        clean, char_map = text, list(range(len(text)))

    sentences = []
    for span_start, span_end in split_sentences(clean, genre):
        toks = []
        for t in tokenize(clean[span_start:span_end]):
            cs = span_start + t.char_start
            ce = span_start + t.char_end
            text_out = normalize_case(t.text) if genre == "forum" else t.text
            raw_start = char_map[cs] if char_map else 0
            raw_end = (char_map[ce - 1] + 1) if char_map else 0
            toks.append(Token(text_out, raw_start, raw_end))
        if toks:
            sentences.append(Sentence(len(sentences), tuple(toks)))
    return Document(doc_id, genre, text, tuple(sentences))


def preprocess_genre(doc: Document) -> Document:
    """Re-run genre preprocessing.  News documents come back byte-identical;
    the operation is idempotent for forum documents."""
    if doc.genre == "news":
        return doc
    return make_document(doc.id, doc.genre, doc.raw_text)


def ingest_documents(path: str | Path) -> DocumentStore:
    """Ingest a JSON Lines corpus file.

    Malformed lines are reported in ``store.errors`` (with line numbers) and
    skipped; a duplicate document id raises.
    """
    store = DocumentStore()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                store.errors.append(f"line {line_no}: invalid JSON ({exc.msg})")
                continue
            problem = _validate_record(record)
            if problem:
                store.errors.append(f"line {line_no}: {problem}")
                continue
            store.add(make_document(record["id"], record["genre"], record["text"]))
    if store.errors:
        for err in store.errors:
            log.warning("%s: %s", path, err)
    return store


def _validate_record(record) -> str | None:
    if not isinstance(record, dict):
        return "record is not an object"
    expected = {"id", "genre", "text"}
    if set(record) != expected:
        return f"record keys {sorted(record)} != {sorted(expected)}"
    if not isinstance(record["id"], str) or not record["id"]:
        return "id must be a nonempty string"
    if record["genre"] not in GENRES:
        return f"genre must be one of {GENRES}"
    if not isinstance(record["text"], str):
        return "text must be a string"
    return None
