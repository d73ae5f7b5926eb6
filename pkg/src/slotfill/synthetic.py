"""Synthetic datasets: a cleanly separable relation corpus for learnability
checks and a label-noised variant for the selection-loop experiments."""

from __future__ import annotations

import numpy as np

from .traindata import LabeledExample

POSITIVE_MIDDLES = (
    ("was", "born", "in"),
    ("was", "raised", "in"),
    ("grew", "up", "in"),
)
NEGATIVE_MIDDLES = (
    ("visited",),
    ("flew", "to"),
    ("wrote", "about"),
    ("never", "saw"),
)
NOISE_VOCAB = ("the", "famous", "young", "reporter", "yesterday", "quietly",
               "again", "meanwhile", "later", "official")


def _make_example(rng: np.random.Generator, label: int,
                  slot: str = "synthetic:relation") -> LabeledExample:
    middles = POSITIVE_MIDDLES if label == 1 else NEGATIVE_MIDDLES
    middle = middles[rng.integers(len(middles))]
    left = tuple(rng.choice(NOISE_VOCAB, size=rng.integers(0, 4)))
    right = tuple(rng.choice(NOISE_VOCAB, size=rng.integers(0, 3)))
    return LabeledExample(left, middle, right,
                          entity_first=bool(rng.random() < 0.5),
                          label=label, slot=slot, origin="distant")


def true_label(example: LabeledExample) -> int:
    """Ground truth by construction: the middle decides the relation."""
    return 1 if tuple(example.middle) in POSITIVE_MIDDLES else 0


def make_separable_dataset(n_train: int = 200, n_test: int = 100,
                           seed: int = 13,
                           ) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """A linearly separable relation dataset with disjoint positive and
    negative context vocabularies."""
    rng = np.random.default_rng(seed)
    train = [_make_example(rng, int(i % 2 == 0)) for i in range(n_train)]
    test = [_make_example(rng, int(i % 2 == 0)) for i in range(n_test)]
    return train, test


def make_noisy_selection_data(n_seed: int = 40, n_noisy: int = 120,
                              noise_rate: float = 0.3, seed: int = 13,
                              ) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Clean seed examples plus distant examples with flipped labels at the
    given rate; ``true_label`` recovers the ground truth."""
    rng = np.random.default_rng(seed)
    seed_data = [_make_example(rng, int(i % 2 == 0)) for i in range(n_seed)]
    noisy = []
    for i in range(n_noisy):
        ex = _make_example(rng, int(i % 2 == 0))
        if rng.random() < noise_rate:
            ex = LabeledExample(ex.left, ex.middle, ex.right, ex.entity_first,
                                1 - ex.label, ex.slot, ex.origin)
        noisy.append(ex)
    return seed_data, noisy


def purity(examples: list[LabeledExample]) -> float:
    """Fraction of examples whose carried label matches the ground truth."""
    if not examples:
        return 1.0
    return sum(1 for ex in examples if ex.label == true_label(ex)) / len(examples)
