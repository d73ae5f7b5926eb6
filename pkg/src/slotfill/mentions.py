"""Entity mention finding: exact and fuzzy name matching, precomputed
coreference chains, the sentence-initial nominal-anaphora heuristic, and
proper-name expansion of person fillers.

The coreference resource is a TSV with one mention per line:
``doc_id  chain_id  sentence_index  token_start  token_end  mention_class  surface``
where mention_class is proper, pronoun or nominal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document
from .query import levenshtein

log = logging.getLogger(__name__)

FUZZY_MAX_NORM_DIST = 0.2
MENTION_KINDS = ("exact", "fuzzy", "coref", "nominal_heuristic")
_KIND_PRIORITY = {k: i for i, k in enumerate(MENTION_KINDS)}

MENTION_CLASSES = ("proper", "pronoun", "nominal")
PERSON_PRONOUNS = {"he", "she", "him", "her"}

# "the XX-year-old" / "the XX-based company" / "the XX-born", XX of 1-3 tokens
_HEURISTIC_MAX_RUN = 3
_ENTITY_FOLLOW_WINDOW = 3


@dataclass(frozen=True)
class Mention:
    doc_id: str
    sentence_index: int
    token_start: int
    token_end: int
    surface: str
    kind: str

    @property
    def span(self) -> tuple[int, int, int]:
        return (self.sentence_index, self.token_start, self.token_end)


@dataclass(frozen=True)
class ChainMention:
    sentence_index: int
    token_start: int
    token_end: int
    surface: str
    mention_class: str


@dataclass
class CorefChain:
    doc_id: str
    chain_id: str
    mentions: list[ChainMention]


def load_coref_resource(path: str | Path) -> dict[str, list[CorefChain]]:
    """Load coreference chains grouped per document; malformed lines are
    skipped with a warning, chains left with fewer than 2 mentions dropped."""
    raw: dict[tuple[str, str], list[ChainMention]] = {}
    order: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                log.warning("%s: line %d: expected 7 fields, got %d",
                            path, line_no, len(parts))
                continue
            doc_id, chain_id, sent_s, start_s, end_s, mclass, surface = parts
            try:
                sent, start, end = int(sent_s), int(start_s), int(end_s)
            except ValueError:
                log.warning("%s: line %d: non-integer span", path, line_no)
                continue
            if sent < 0 or start < 0 or end <= start:
                log.warning("%s: line %d: invalid span (%d, %d, %d)",
                            path, line_no, sent, start, end)
                continue
            if mclass not in MENTION_CLASSES:
                log.warning("%s: line %d: unknown mention class %r",
                            path, line_no, mclass)
                continue
            key = (doc_id, chain_id)
            if key not in raw:
                raw[key] = []
                order.append(key)
            raw[key].append(ChainMention(sent, start, end, surface, mclass))

    chains: dict[str, list[CorefChain]] = {}
    for doc_id, chain_id in order:
        ms = raw[(doc_id, chain_id)]
        if len(ms) < 2:
            log.warning("chain %s/%s has %d mention(s), dropped",
                        doc_id, chain_id, len(ms))
            continue
        chains.setdefault(doc_id, []).append(CorefChain(doc_id, chain_id, ms))
    return chains


def find_name_mentions(doc: Document, names: list[str],
                       max_norm_dist: float = FUZZY_MAX_NORM_DIST) -> list[Mention]:
    """Find token windows matching any name within a normalized edit distance
    (distance / length of the longer string).  Window sizes follow each
    name's token count; matching is case-insensitive."""
    from .corpus import tokenize  # tokenization of the names themselves

    targets = []
    for name in names:
        toks = [t.text for t in tokenize(name)]
        if toks:
            targets.append((" ".join(toks).lower(), len(toks)))

    found: dict[tuple[int, int, int], Mention] = {}
    for sent in doc.sentences:
        texts = sent.texts()
        for target, width in targets:
            for i in range(0, len(texts) - width + 1):
                window = texts[i:i + width]
                surface = " ".join(window)
                lowered = surface.lower()
                longer = max(len(lowered), len(target))
                if longer == 0:
                    continue
                if abs(len(lowered) - len(target)) / longer > max_norm_dist:
                    continue
                dist = levenshtein(lowered, target)
                if dist / longer > max_norm_dist:
                    continue
                kind = "exact" if dist == 0 else "fuzzy"
                span = (sent.index, i, i + width)
                prev = found.get(span)
                if prev is None or _KIND_PRIORITY[kind] < _KIND_PRIORITY[prev.kind]:
                    found[span] = Mention(doc.id, sent.index, i, i + width,
                                          surface, kind)
    return sorted(found.values(), key=lambda m: m.span)


def _overlaps(a: ChainMention, sent: int, start: int, end: int) -> bool:
    return a.sentence_index == sent and a.token_start < end and start < a.token_end


def attach_coref_mentions(doc: Document, chains: list[CorefChain],
                          seed: list[Mention]) -> list[Mention]:
    """Return the NEW mentions contributed by chains overlapping a seed
    mention (spans already present as seeds are not duplicated)."""
    seed_spans = {m.span for m in seed}
    added: dict[tuple[int, int, int], Mention] = {}
    for chain in chains:
        adopted = any(
            _overlaps(cm, s.sentence_index, s.token_start, s.token_end)
            for cm in chain.mentions for s in seed
        )
        if not adopted:
            continue
        for cm in chain.mentions:
            span = (cm.sentence_index, cm.token_start, cm.token_end)
            if span in seed_spans or span in added:
                continue
            if cm.sentence_index >= len(doc.sentences):
                continue
            sent = doc.sentences[cm.sentence_index]
            if cm.token_end > len(sent.tokens):
                continue
            surface = " ".join(sent.texts()[cm.token_start:cm.token_end])
            added[span] = Mention(doc.id, cm.sentence_index, cm.token_start,
                                  cm.token_end, surface, "coref")
    return sorted(added.values(), key=lambda m: m.span)


def _match_heuristic_pattern(texts: list[str]) -> tuple[int, int] | None:
    """Match "the XX-year-old" / "the XX-based company" / "the XX-born" at the
    start of a sentence; return the pattern span or None."""
    if not texts or texts[0].lower() != "the":
        return None
    limit = min(_HEURISTIC_MAX_RUN, len(texts) - 1)
    for j in range(1, limit + 1):
        word = texts[j].lower()
        if word.endswith("-year-old") or word.endswith("-born"):
            return (0, j + 1)
        if word.endswith("-based") and j + 1 < len(texts) \
                and texts[j + 1].lower() == "company":
            return (0, j + 2)
    return None


def nominal_anaphora_heuristic(doc: Document, seed_mentions: list[Mention],
                               blocked_tokens: dict[int, set[int]] | None = None,
                               ) -> list[Mention]:
    """If the entity occurs in sentence t and sentence t+1 starts with a
    nominal-anaphora pattern not followed by a PER/ORG entity token (within 3
    tokens), emit a mention covering the pattern span.

    ``blocked_tokens`` maps sentence index to token positions covered by
    PER/ORG named-entity spans.
    """
    blocked = blocked_tokens or {}
    seed_sentences = {m.sentence_index for m in seed_mentions}
    existing = {m.span for m in seed_mentions}
    out: list[Mention] = []
    for t in sorted(seed_sentences):
        nxt = t + 1
        if nxt >= len(doc.sentences):
            continue
        texts = doc.sentences[nxt].texts()
        span = _match_heuristic_pattern(texts)
        if span is None:
            continue
        start, end = span
        follow = range(end, min(end + _ENTITY_FOLLOW_WINDOW, len(texts)))
        if any(i in blocked.get(nxt, set()) for i in follow):
            continue
        key = (nxt, start, end)
        if key in existing:
            continue
        existing.add(key)
        out.append(Mention(doc.id, nxt, start, end,
                           " ".join(texts[start:end]), "nominal_heuristic"))
    return out


def merge_mentions(*groups: list[Mention]) -> list[Mention]:
    """Merge mention lists, deduplicating spans (earlier groups win)."""
    merged: dict[tuple[int, int, int], Mention] = {}
    for group in groups:
        for m in group:
            if m.span not in merged:
                merged[m.span] = m
    return sorted(merged.values(), key=lambda m: m.span)


def expand_person_fillers(doc: Document, chains: list[CorefChain],
                          span: tuple[int, int, int], surface: str,
                          is_pronoun: bool = False) -> str | None:
    """Canonicalize a person filler via its coreference chain.

    If the filler span lies in a chain with a proper-name mention, the proper
    name is returned (the filler's own surface when it is itself that
    mention).  A pronoun in no chain yields None; a proper name in no chain
    is returned unchanged.
    """
    sent, start, end = span
    for chain in chains:
        hit = next((cm for cm in chain.mentions
                    if _overlaps(cm, sent, start, end)), None)
        if hit is None:
            continue
        propers = [cm for cm in chain.mentions if cm.mention_class == "proper"]
        if not propers:
            return None if is_pronoun else surface
        if hit.mention_class == "proper" and (hit.token_start, hit.token_end) == (start, end):
            return surface
        return max(propers, key=lambda cm: len(cm.surface)).surface
    return None if is_pronoun else surface
