"""Inverted-index document retrieval with BM25 ranking.

Three query forms are supported for an entity: AND over the name terms, AND
over the single IR-alias terms, and OR over the name terms.  Geo-political
entities use only the AND forms.  At most 100 documents are returned per
entity.
"""

from __future__ import annotations

import json
import math
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import DocumentStore, tokenize

BM25_K1 = 1.2
BM25_B = 0.75
MAX_DOCS_PER_ENTITY = 100

_PUNCT = set(string.punctuation)


def _is_punct_only(text: str) -> bool:
    return all(c in _PUNCT for c in text)


def text_terms(text: str) -> list[str]:
    """Lowercased index terms of a piece of text (punctuation-only dropped)."""
    return [t.text.lower() for t in tokenize(text) if not _is_punct_only(t.text)]


class InvertedIndex:
    def __init__(self):
        self.postings: dict[str, list[tuple[str, int]]] = {}
        self.doc_lengths: dict[str, int] = {}

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_doc_length(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def term_freq(self, term: str, doc_id: str) -> int:
        for d, tf in self.postings.get(term, ()):
            if d == doc_id:
                return tf
        return 0

    def doc_ids_for(self, term: str) -> list[str]:
        return [d for d, _ in self.postings.get(term, ())]


@dataclass(frozen=True)
class RetrievalResult:
    doc_id: str
    score: float
    matched_query: str  # and_name | and_alias | or_name


def build_index(store: DocumentStore) -> InvertedIndex:
    """Index every token of every sentence, lowercased; punctuation-only
    tokens are skipped."""
    index = InvertedIndex()
    counts: dict[str, Counter] = {}
    for doc in store:
        c = Counter()
        n_terms = 0
        for sent in doc.sentences:
            for tok in sent.tokens:
                if _is_punct_only(tok.text):
                    continue
                c[tok.text.lower()] += 1
                n_terms += 1
        counts[doc.id] = c
        index.doc_lengths[doc.id] = n_terms
    for doc_id in sorted(counts):
        for term, tf in counts[doc_id].items():
            index.postings.setdefault(term, []).append((doc_id, tf))
    for term in index.postings:
        index.postings[term].sort()
    return index


def bm25_score(index: InvertedIndex, terms: list[str], doc_id: str) -> float:
    """Okapi BM25 with the nonnegative (+1 inside the log) idf variant."""
    n = index.doc_count
    avgdl = index.avg_doc_length
    dl = index.doc_lengths.get(doc_id, 0)
    score = 0.0
    for term in set(terms):
        tf = index.term_freq(term, doc_id)
        if tf == 0:
            continue
        df = len(index.postings.get(term, ()))
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        norm = BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl) if avgdl else BM25_K1
        score += idf * tf * (BM25_K1 + 1.0) / (tf + norm)
    return score


def _ranked(index: InvertedIndex, doc_ids: set[str], terms: list[str],
            matched_query: str) -> list[RetrievalResult]:
    results = [RetrievalResult(d, bm25_score(index, terms, d), matched_query)
               for d in doc_ids]
    results.sort(key=lambda r: (-r.score, r.doc_id))
    return results


def query_and(index: InvertedIndex, terms: list[str]) -> list[RetrievalResult]:
    """Documents containing ALL terms, BM25-ranked (ties by doc id)."""
    if not terms:
        raise ValueError("terms must be nonempty")
    terms = [t.lower() for t in terms]
    doc_sets = [set(index.doc_ids_for(t)) for t in set(terms)]
    hits = set.intersection(*doc_sets) if doc_sets else set()
    return _ranked(index, hits, terms, "and_name")


def query_or(index: InvertedIndex, terms: list[str]) -> list[RetrievalResult]:
    """Documents containing ANY term, BM25-ranked (ties by doc id)."""
    if not terms:
        raise ValueError("terms must be nonempty")
    terms = [t.lower() for t in terms]
    hits = set()
    for t in set(terms):
        hits.update(index.doc_ids_for(t))
    return _ranked(index, hits, terms, "or_name")


def retrieve_for_entity(index: InvertedIndex, name: str,
                        ir_alias: str | None = None,
                        entity_type: str = "PER",
                        limit: int = MAX_DOCS_PER_ENTITY) -> list[str]:
    """Union of the three query forms (and_name > and_alias > or_name),
    deduplicated and capped.  GPE entities skip the OR query."""
    if not name:
        raise ValueError("entity name must be nonempty")
    name_terms = text_terms(name)
    if not name_terms:
        return []

    tiers: list[list[RetrievalResult]] = [query_and(index, name_terms)]
    if ir_alias:
        alias_terms = text_terms(ir_alias)
        if alias_terms:
            hits = query_and(index, alias_terms)
            tiers.append([RetrievalResult(r.doc_id, r.score, "and_alias")
                          for r in hits])
    if entity_type != "GPE":
        tiers.append(query_or(index, name_terms))

    out: list[str] = []
    seen = set()
    for tier in tiers:
        for r in tier:
            if r.doc_id not in seen:
                seen.add(r.doc_id)
                out.append(r.doc_id)
                if len(out) >= limit:
                    return out
    return out


def save_index(index: InvertedIndex, path: str | Path) -> None:
    payload = {
        "doc_lengths": index.doc_lengths,
        "postings": {t: [[d, tf] for d, tf in plist]
                     for t, plist in index.postings.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    index = InvertedIndex()
    index.doc_lengths = dict(payload["doc_lengths"])
    index.postings = {t: [(d, int(tf)) for d, tf in plist]
                      for t, plist in payload["postings"].items()}
    return index
