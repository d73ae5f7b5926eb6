"""End-to-end query orchestration: alias expansion, retrieval, the optional
entity-linking gate, mention finding (with coreference), candidate
extraction, ensemble scoring, postprocessing, and micro-averaged evaluation.

Five run configurations are supported: a high-precision run (+0.2
thresholds), the pattern+SVM+CNN base run, a run adding RNNs, a run adding
the entity-linking gate, and a traditional pattern+SVM run.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classify import (
    canonicalize_slot,
    combine_scores,
    load_svm,
    match_patterns,
    svm_score,
    weights_for_slot,
)
from .corpus import DocumentStore, ingest_documents
from .extract import (
    candidates_for_slot,
    filter_impossible,
    location_granularity,
    tag_entities,
)
from .mentions import (
    attach_coref_mentions,
    find_name_mentions,
    merge_mentions,
    nominal_anaphora_heuristic,
)
from .nnets import load_model, rnn_ensemble_score
from .postprocess import (
    Answer,
    disambiguate_location,
    effective_threshold,
    infer_locations,
    normalize_date,
    rank_and_truncate,
)
from .query import SlotQuery, clean_aliases, document_matches_entity, link_entity, select_ir_alias
from .retrieval import InvertedIndex, build_index, retrieve_for_entity
from . import resources

log = logging.getLogger(__name__)

ENTITY_NE_TYPES = ("PER", "ORG", "GPE")


class ModelMissingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    run_id: int
    classifiers: frozenset[str]
    entity_linking: bool = False
    threshold_bonus: float = 0.0
    coref_enabled: bool = True


def configure_run(run_id: int, coref_enabled: bool = True) -> RunConfig:
    """The five standard run configurations."""
    base = frozenset({"pattern", "svm", "cnn"})
    table = {
        1: RunConfig(1, base, threshold_bonus=0.2, coref_enabled=coref_enabled),
        2: RunConfig(2, base, coref_enabled=coref_enabled),
        3: RunConfig(3, base | {"rnn"}, coref_enabled=coref_enabled),
        4: RunConfig(4, base, entity_linking=True, coref_enabled=coref_enabled),
        5: RunConfig(5, frozenset({"pattern", "svm"}), coref_enabled=coref_enabled),
    }
    if run_id not in table:
        raise ValueError(f"unknown run id {run_id}; expected 1..5")
    return table[run_id]


@dataclass(frozen=True)
class EvalCounts:
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class ClassifierView:
    """A candidate as presented to the classifiers, with argument roles
    swapped for inverse slots."""
    left: tuple[str, ...]
    middle: tuple[str, ...]
    right: tuple[str, ...]
    entity_first: bool
    entity_tokens: tuple[str, ...]
    filler_tokens: tuple[str, ...]


def classifier_view(candidate, swapped: bool) -> ClassifierView:
    if not swapped:
        return ClassifierView(candidate.left, candidate.middle, candidate.right,
                              candidate.entity_first, candidate.entity_tokens,
                              candidate.filler_tokens)
    return ClassifierView(candidate.left, candidate.middle, candidate.right,
                          not candidate.entity_first, candidate.filler_tokens,
                          candidate.entity_tokens)


class ModelRegistry:
    """Trained per-slot models, keyed by the canonical slot name."""

    def __init__(self):
        self.svms: dict[str, object] = {}
        self.cnns: dict[str, object] = {}
        self.rnns: dict[str, dict[str, object]] = {}

    @classmethod
    def from_dir(cls, directory: str | Path) -> "ModelRegistry":
        registry = cls()
        directory = Path(directory)
        if not directory.exists():
            return registry
        for path in sorted(directory.glob("*.npz")):
            with np.load(path) as data:
                if "header" in data.files:
                    header = json.loads(bytes(data["header"]).decode("utf-8"))
                    slot = header.get("slot", "")
                    kind = header["kind"]
                else:
                    slot = bytes(data["slot"]).decode("utf-8")
                    kind = "svm"
            if kind == "svm":
                registry.svms[slot] = load_svm(path)
            else:
                model = load_model(path)
                if kind == "cnn":
                    registry.cnns[slot] = model
                else:
                    registry.rnns.setdefault(slot, {})[model.variant] = model
        return registry

    def svm_for(self, slot: str):
        if slot not in self.svms:
            raise ModelMissingError(f"no SVM model for slot {slot!r}")
        return self.svms[slot]

    def cnn_for(self, slot: str):
        if slot not in self.cnns:
            raise ModelMissingError(f"no CNN model for slot {slot!r}")
        return self.cnns[slot]

    def rnns_for(self, slot: str) -> dict[str, object]:
        if slot not in self.rnns or not self.rnns[slot]:
            raise ModelMissingError(f"no RNN models for slot {slot!r}")
        return self.rnns[slot]


@dataclass
class SystemState:
    """Read-only resources shared by all queries of a run."""
    store: DocumentStore
    index: InvertedIndex
    slot_configs: dict
    validation: dict
    gazetteers: object
    patterns: dict
    alias_table: dict
    nicknames: dict
    kb: list
    location_maps: object
    weights: dict
    coref: dict = field(default_factory=dict)
    models: ModelRegistry = field(default_factory=ModelRegistry)


def load_system(corpus_path: str | Path, coref_path: str | Path | None = None,
                models_dir: str | Path | None = None,
                weights_path: str | Path | None = None) -> SystemState:
    """Assemble a system over a corpus file, with bundled default resources."""
    from .classify import load_weights
    from .mentions import load_coref_resource

    store = ingest_documents(corpus_path)
    state = SystemState(
        store=store,
        index=build_index(store),
        slot_configs=resources.default_slot_configs(),
        validation=resources.default_validation(),
        gazetteers=resources.default_gazetteers(),
        patterns=resources.default_patterns(),
        alias_table=resources.default_alias_table(),
        nicknames=resources.default_nicknames(),
        kb=resources.default_kb(),
        location_maps=resources.default_location_maps(),
        weights=load_weights(weights_path) if weights_path
        else resources.default_weights(),
    )
    if coref_path:
        state.coref = load_coref_resource(coref_path)
    if models_dir:
        state.models = ModelRegistry.from_dir(models_dir)
    return state


def _sentence_bag(sentence) -> Counter:
    return Counter(t.lower() for t in sentence.texts())


def _mention_context_bag(doc, names: list[str], exact_only: bool = False) -> Counter:
    """Union of term bags of the sentences containing a name mention."""
    bag: Counter = Counter()
    for m in find_name_mentions(doc, names):
        if exact_only and m.kind != "exact":
            continue
        bag.update(_sentence_bag(doc.sentences[m.sentence_index]))
    return bag


def _collect_mentions(state: SystemState, doc, names: list[str],
                      cfg: RunConfig, tag_cache: dict):
    """Seed mentions, plus coref chains and the nominal heuristic when
    coreference is enabled."""
    seed = find_name_mentions(doc, names)
    if not cfg.coref_enabled:
        return seed
    chains = state.coref.get(doc.id, [])
    merged = merge_mentions(seed, attach_coref_mentions(doc, chains, seed))
    if not merged:
        return merged
    blocked: dict[int, set[int]] = {}
    for t in {m.sentence_index + 1 for m in merged}:
        if t < len(doc.sentences):
            spans = _tagged(state, doc, t, tag_cache)
            blocked[t] = {i for s in spans if s.ne_type in ("PER", "ORG")
                          for i in range(s.token_start, s.token_end)}
    heuristic = nominal_anaphora_heuristic(doc, merged, blocked)
    return merge_mentions(merged, heuristic)


def _tagged(state: SystemState, doc, sentence_index: int, cache: dict):
    key = (doc.id, sentence_index)
    if key not in cache:
        cache[key] = tag_entities(doc.sentences[sentence_index], state.gazetteers)
    return cache[key]


def _score_candidate(state: SystemState, cfg: RunConfig, candidate,
                     canonical: str, swapped: bool, canonical_cfg) -> float:
    patterns = state.patterns.get(canonical, [])
    pattern_score = match_patterns(candidate, patterns, swapped=swapped)
    if canonical_cfg.classifier_less:
        return pattern_score
    view = classifier_view(candidate, swapped)
    scores = {"pattern": pattern_score}
    if "svm" in cfg.classifiers:
        scores["svm"] = svm_score(state.models.svm_for(canonical), view)
    if "cnn" in cfg.classifiers:
        scores["cnn"] = state.models.cnn_for(canonical).forward(view)
    if "rnn" in cfg.classifiers:
        variants = state.models.rnns_for(canonical)
        scores["rnn"] = rnn_ensemble_score(
            p_uni=variants["uni"].forward(view) if "uni" in variants else None,
            p_bi=variants["bi"].forward(view) if "bi" in variants else None,
            p_multi=variants["multitask"].forward(view)
            if "multitask" in variants else None,
        )
    return combine_scores(scores, weights_for_slot(state.weights, canonical))


def _postprocess_candidate(state: SystemState, query: SlotQuery, candidate,
                           score: float) -> Answer | None:
    slot_cfg = state.slot_configs[query.slot]
    filler = candidate.canonical_filler
    if slot_cfg.required_ne_type == "DATE":
        normalized = normalize_date(filler)
        if normalized is None:
            return None
        filler = normalized
    provenance = (f"{candidate.doc_id}:{candidate.filler.sentence_index}:"
                  f"{candidate.entity_mention.token_start}-"
                  f"{candidate.entity_mention.token_end}:"
                  f"{candidate.filler.token_start}-{candidate.filler.token_end}")
    answer = Answer(query.id, query.hop, query.slot, filler, candidate.doc_id,
                    provenance, score)
    granularity = location_granularity(query.slot)
    if granularity is None:
        return answer
    kind = disambiguate_location(answer.filler, state.location_maps)
    if kind == "unknown":
        return None
    if granularity == "any" or kind == granularity:
        return answer
    return infer_locations(answer, granularity, state.location_maps)


def extract_candidates(state: SystemState, query: SlotQuery,
                       cfg: RunConfig) -> list:
    """The pre-classification pipeline stages: alias expansion, retrieval,
    the optional entity-linking gate, mention finding, and extraction."""
    slot_cfg = state.slot_configs.get(query.slot)
    if slot_cfg is None:
        raise ValueError(f"unknown slot {query.slot!r}")

    raw_aliases = state.alias_table.get(query.entity_name, [])
    aliases = clean_aliases(query.entity_name, raw_aliases, query.entity_type,
                            state.nicknames)
    ir_alias = select_ir_alias(query.entity_name, aliases)
    doc_ids = retrieve_for_entity(state.index, query.entity_name, ir_alias,
                                  query.entity_type)
    names = [query.entity_name] + aliases

    if cfg.entity_linking and doc_ids:
        context: Counter = Counter()
        for doc_id in doc_ids:
            context.update(_mention_context_bag(state.store.get(doc_id),
                                                [query.entity_name],
                                                exact_only=True))
        target_id = link_entity(query, state.kb, context)
        if target_id is not None:
            target = next(e for e in state.kb if e.entity_id == target_id)
            doc_ids = [
                d for d in doc_ids
                if document_matches_entity(
                    _mention_context_bag(state.store.get(d), names),
                    target, state.kb, query.entity_name)
            ]

    tag_cache: dict = {}
    candidates = []
    for doc_id in doc_ids:
        doc = state.store.get(doc_id)
        mentions = _collect_mentions(state, doc, names, cfg, tag_cache)
        if not mentions:
            continue
        chains = state.coref.get(doc.id, []) if cfg.coref_enabled else []
        for sentence_index in sorted({m.sentence_index for m in mentions}):
            spans = _tagged(state, doc, sentence_index, tag_cache)
            found = candidates_for_slot(doc, sentence_index, mentions, slot_cfg,
                                        spans, chains=chains, query_id=query.id)
            candidates.extend(
                c for c in found
                if filter_impossible(c, slot_cfg, state.validation))
    return candidates


def run_query(state: SystemState, query: SlotQuery, cfg: RunConfig) -> list[Answer]:
    """Execute the full pipeline for one query at its hop."""
    slot_cfg = state.slot_configs.get(query.slot)
    if slot_cfg is None:
        raise ValueError(f"unknown slot {query.slot!r}")
    canonical, swapped = canonicalize_slot(query.slot, state.slot_configs)
    canonical_cfg = state.slot_configs[canonical]
    candidates = extract_candidates(state, query, cfg)

    answers = []
    for candidate in candidates:
        score = _score_candidate(state, cfg, candidate, canonical, swapped,
                                 canonical_cfg)
        if score < effective_threshold(slot_cfg.threshold, query.hop,
                                       cfg.threshold_bonus):
            continue
        answer = _postprocess_candidate(state, query, candidate, score)
        if answer is not None:
            answers.append(answer)
    return rank_and_truncate(answers, slot_cfg)


def validate_cold_start(query: SlotQuery, slot_configs: dict) -> None:
    """A hop-1 slot requires the hop-0 filler to be an entity type."""
    if query.next_slot is None:
        return
    if query.next_slot not in slot_configs:
        raise ValueError(f"unknown hop-1 slot {query.next_slot!r}")
    hop0_cfg = slot_configs[query.slot]
    if hop0_cfg.required_ne_type not in ENTITY_NE_TYPES:
        raise ValueError(
            f"hop-0 slot {query.slot!r} fills type "
            f"{hop0_cfg.required_ne_type}, which cannot seed a hop-1 query")


def run_cold_start(state: SystemState, query: SlotQuery,
                   cfg: RunConfig) -> list[Answer]:
    """Run hop 0, then re-query each hop-0 filler against the hop-1 slot
    (with its +0.1 threshold adjustment); provenance chains are recorded."""
    validate_cold_start(query, state.slot_configs)
    hop0_answers = run_query(state, replace(query, hop=0), cfg)
    answers = list(hop0_answers)
    if query.next_slot is None:
        return answers
    filler_type = state.slot_configs[query.slot].required_ne_type
    for parent in hop0_answers:
        hop1_query = SlotQuery(query.id, parent.filler, filler_type,
                               query.next_slot, hop=1)
        for a in run_query(state, hop1_query, cfg):
            answers.append(replace(
                a, provenance=f"{a.provenance}|hop0:{parent.provenance}"))
    return answers


def run_queries(state: SystemState, queries: list[SlotQuery],
                cfg: RunConfig) -> list[Answer]:
    """All queries (cold-start expansion included), deduplicated rows."""
    answers: dict[tuple, Answer] = {}
    for query in queries:
        for a in run_cold_start(state, query, cfg):
            key = (a.query_id, a.hop, a.slot, a.filler, a.doc_id)
            if key not in answers or a.score > answers[key].score:
                answers[key] = a
    return sorted(answers.values(),
                  key=lambda a: (a.query_id, a.hop, a.slot, a.filler, a.doc_id))


# ---------------------------------------------------------------------------
# evaluation


def score_output(answers: list[Answer], gold: list[tuple[str, int, str, str]],
                 ) -> tuple[float, float, float, EvalCounts]:
    """Micro-averaged P/R/F1 over all queries and hops; answers match gold on
    (query, hop, slot, normalized surface), case-insensitively."""
    sys_keys = {(a.query_id, a.hop, a.slot, a.filler.lower()) for a in answers}
    gold_keys = {(q, h, s, f.lower()) for q, h, s, f in gold}
    tp = len(sys_keys & gold_keys)
    fp = len(sys_keys - gold_keys)
    fn = len(gold_keys - sys_keys)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1_frac = (2 * precision * recall / (precision + recall)
               if precision + recall else 0.0)
    return precision, recall, f1_frac, EvalCounts(tp, fp, fn)


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision/recall percentages, 2 decimals."""
    if p + r == 0:
        return 0.0
    return round(2 * p * r / (p + r), 2)


# ---------------------------------------------------------------------------
# file formats


def load_queries(path: str | Path) -> list[SlotQuery]:
    """JSON Lines {id, name, type, slot, hop, next_slot?}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(SlotQuery(rec["id"], rec["name"], rec["type"],
                                 rec["slot"], int(rec.get("hop", 0)),
                                 rec.get("next_slot")))
    return out


def write_answers(answers: list[Answer], path: str | Path) -> None:
    """TSV query_id, hop, slot, filler, doc_id, score; rows sorted by the
    content-independent key so output files are reproducible byte-for-byte."""
    rows = sorted(answers,
                  key=lambda a: (a.query_id, a.hop, a.slot, a.filler, a.doc_id))
    with open(path, "w", encoding="utf-8") as fh:
        for a in rows:
            fh.write(f"{a.query_id}\t{a.hop}\t{a.slot}\t{a.filler}\t"
                     f"{a.doc_id}\t{a.score:.4f}\n")


def read_answers(path: str | Path) -> list[Answer]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            qid, hop, slot, filler, doc_id, score = line.split("\t")
            out.append(Answer(qid, int(hop), slot, filler, doc_id, "",
                              float(score)))
    return out


def load_gold(path: str | Path) -> list[tuple[str, int, str, str]]:
    """TSV query_id, hop, slot, filler."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            qid, hop, slot, filler = line.split("\t")[:4]
            out.append((qid, int(hop), slot, filler))
    return out
