"""Pattern matching, the linear max-margin classifier, and linear
interpolation of the per-classifier scores.

Patterns are token templates with one <ENTITY> and one <FILLER> placeholder
and bounded wildcards ``*k`` (matching 0..k tokens, k <= 5); a template may
match anywhere in the sentence but the placeholders must align exactly with
the candidate's argument spans.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

ENTITY_SLOT = "<ENTITY>"
FILLER_SLOT = "<FILLER>"
MAX_WILDCARD = 5
DEFAULT_HASH_BITS = 18

CLASSIFIER_ORDER = ("pattern", "svm", "cnn", "rnn")
DEFAULT_WEIGHTS = {"pattern": 0.2, "svm": 0.3, "cnn": 0.3, "rnn": 0.2}


@dataclass(frozen=True)
class Pattern:
    slot: str
    template: tuple[str, ...]

    def __post_init__(self):
        if self.template.count(ENTITY_SLOT) != 1 \
                or self.template.count(FILLER_SLOT) != 1:
            raise ValueError(
                f"template needs exactly one {ENTITY_SLOT} and one "
                f"{FILLER_SLOT}: {' '.join(self.template)}")
        for tok in self.template:
            if tok.startswith("*"):
                k = int(tok[1:])
                if not 0 < k <= MAX_WILDCARD:
                    raise ValueError(f"wildcard bound out of range: {tok}")


def load_patterns(path: str | Path) -> dict[str, list[Pattern]]:
    """TSV ``slot<TAB>template`` -> patterns grouped by slot."""
    patterns: dict[str, list[Pattern]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                log.warning("%s: line %d: expected 2 fields", path, line_no)
                continue
            slot, template = parts
            patterns.setdefault(slot, []).append(
                Pattern(slot, tuple(template.split())))
    return patterns


def _match_from(template: tuple[str, ...], ti: int, tokens: list[str],
                si: int, entity_span: tuple[int, int],
                filler_span: tuple[int, int]) -> bool:
    if ti == len(template):
        return True
    item = template[ti]
    if item == ENTITY_SLOT:
        start, end = entity_span
        if si != start:
            return False
        return _match_from(template, ti + 1, tokens, end, entity_span, filler_span)
    if item == FILLER_SLOT:
        start, end = filler_span
        if si != start:
            return False
        return _match_from(template, ti + 1, tokens, end, entity_span, filler_span)
    if item.startswith("*"):
        bound = int(item[1:])
        for skip in range(0, bound + 1):
            if si + skip > len(tokens):
                break
            if _match_from(template, ti + 1, tokens, si + skip,
                           entity_span, filler_span):
                return True
        return False
    if si >= len(tokens) or tokens[si].lower() != item.lower():
        return False
    return _match_from(template, ti + 1, tokens, si + 1, entity_span, filler_span)


def candidate_token_layout(example) -> tuple[list[str], tuple[int, int], tuple[int, int]]:
    """Rebuild the sentence token list and argument spans from a
    candidate-shaped example.

    Candidates carry their span surfaces; bare training examples do not, so
    each span collapses to a single placeholder token there.
    """
    entity_tokens = list(getattr(example, "entity_tokens", ("<entity>",)))
    filler_tokens = list(getattr(example, "filler_tokens", ("<filler>",)))
    first, second = (entity_tokens, filler_tokens) if example.entity_first \
        else (filler_tokens, entity_tokens)
    tokens = list(example.left)
    s1 = len(tokens)
    tokens.extend(first)
    e1 = len(tokens)
    tokens.extend(example.middle)
    s2 = len(tokens)
    tokens.extend(second)
    e2 = len(tokens)
    tokens.extend(example.right)
    if example.entity_first:
        return tokens, (s1, e1), (s2, e2)
    return tokens, (s2, e2), (s1, e1)


def match_patterns(example, patterns: list[Pattern],
                   swapped: bool = False) -> float:
    """1.0 iff any template matches with the placeholders aligned to the
    example's spans (roles swapped for inverse slots); else 0.0."""
    tokens, entity_span, filler_span = candidate_token_layout(example)
    if swapped:
        entity_span, filler_span = filler_span, entity_span
    for pattern in patterns:
        for start in range(len(tokens) + 1):
            if _match_from(pattern.template, 0, tokens, start,
                           entity_span, filler_span):
                return 1.0
    return 0.0


def _hash_feature(name: str, bits: int) -> int:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % (1 << bits)


def _middle_length_bucket(n: int) -> str:
    if n <= 2:
        return str(n)
    if n <= 5:
        return "3-5"
    return "6+"


def featurize(example, bits: int = DEFAULT_HASH_BITS) -> dict[int, float]:
    """Hashed sparse features: per-segment unigrams (L:/M:/R: prefixes),
    middle bigrams, the argument-order flag, and a middle-length bucket."""
    features: dict[int, float] = {}

    def add(name: str, value: float = 1.0) -> None:
        idx = _hash_feature(name, bits)
        features[idx] = features.get(idx, 0.0) + value

    for prefix, segment in (("L", example.left), ("M", example.middle),
                            ("R", example.right)):
        for word in segment:
            add(f"{prefix}:{word.lower()}")
    middle = [w.lower() for w in example.middle]
    for a, b in zip(middle, middle[1:]):
        add(f"MB:{a}_{b}")
    add(f"EF:{int(bool(example.entity_first))}")
    add(f"ML:{_middle_length_bucket(len(middle))}")
    return features


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_hash_bits: int = DEFAULT_HASH_BITS


@dataclass
class SVMConfig:
    learning_rate: float = 0.1
    epochs: int = 20
    l2: float = 1e-4
    seed: int = 13
    hash_bits: int = DEFAULT_HASH_BITS


def svm_margin(model: LinearModel, example) -> float:
    features = featurize(example, model.feature_hash_bits)
    return float(sum(model.weights[i] * v for i, v in features.items())
                 + model.bias)


# hinge training settles functional margins near 1; the temperature maps a
# satisfied margin to a confident probability (sigma(3) ~ 0.95)
SVM_SCORE_SCALE = 3.0


def svm_score(model: LinearModel, example) -> float:
    """Logistic squashing of the margin, so the score interpolates."""
    return 1.0 / (1.0 + math.exp(-SVM_SCORE_SCALE * svm_margin(model, example)))


def svm_train(dataset: list[tuple[object, int]],
              config: SVMConfig | None = None) -> LinearModel:
    """Hinge loss + L2 via SGD, deterministic by seed."""
    if not dataset:
        raise ValueError("dataset must be nonempty")
    config = config or SVMConfig()
    rng = np.random.default_rng(config.seed)
    model = LinearModel(np.zeros(1 << config.hash_bits), 0.0, config.hash_bits)
    featurized = [(featurize(ex, config.hash_bits), 1 if label else -1)
                  for ex, label in dataset]
    for _ in range(config.epochs):
        for i in rng.permutation(len(featurized)):
            features, y = featurized[i]
            margin = sum(model.weights[j] * v for j, v in features.items()) \
                + model.bias
            model.weights *= (1.0 - config.learning_rate * config.l2)
            if y * margin < 1.0:
                for j, v in features.items():
                    model.weights[j] += config.learning_rate * y * v
                model.bias += config.learning_rate * y
    return model


def save_svm(model: LinearModel, path: str | Path, slot: str = "") -> None:
    np.savez(path, weights=model.weights, bias=np.array([model.bias]),
             bits=np.array([model.feature_hash_bits]),
             slot=np.frombuffer(slot.encode("utf-8"), dtype=np.uint8))


def load_svm(path: str | Path) -> LinearModel:
    with np.load(path) as data:
        return LinearModel(data["weights"].copy(), float(data["bias"][0]),
                           int(data["bits"][0]))


@dataclass
class ScoreVector:
    pattern: float
    svm: float | None = None
    cnn: float | None = None
    rnn: float | None = None
    combined: float = 0.0

    def present(self) -> dict[str, float]:
        out = {}
        for name in CLASSIFIER_ORDER:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def combine_scores(scores: dict[str, float], weights: dict[str, float]) -> float:
    """Weighted mean over the present scores, weights renormalized to 1."""
    if not scores:
        raise ValueError("at least one score required")
    usable = {k: weights.get(k, 0.0) for k in scores}
    total = sum(usable.values())
    if total <= 0.0:
        raise ValueError("all interpolation weights are zero for the present "
                         f"scores {sorted(scores)}")
    return sum(scores[k] * w / total for k, w in usable.items())


def load_weights(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def weights_for_slot(weights: dict, slot: str) -> dict[str, float]:
    """Weights file is either one global mapping or per-slot mappings under
    slot keys with an optional "default"."""
    if any(k in weights for k in CLASSIFIER_ORDER):
        return {k: float(v) for k, v in weights.items()}
    table = weights.get(slot) or weights.get("default")
    if table is None:
        return dict(DEFAULT_WEIGHTS)
    return {k: float(v) for k, v in table.items()}


def canonicalize_slot(slot: str, slot_configs: dict) -> tuple[str, bool]:
    """Map a slot to its canonical classification slot; swapped is true when
    the canonical slot is the slot's inverse (argument roles flip)."""
    cfg = slot_configs.get(slot)
    if cfg is None:
        raise ValueError(f"unknown slot {slot!r}")
    canonical = cfg.canonical_slot
    swapped = canonical != slot and cfg.inverse_slot == canonical
    return canonical, swapped
