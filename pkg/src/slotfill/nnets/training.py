"""Mini-batch SGD with backpropagation, gradient clipping and L2 decay,
plus a central-finite-difference gradient checker."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 50
    batch_size: int = 16
    seed: int = 13
    clip_norm: float = 5.0
    l2: float = 1e-4

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be nonnegative")


@dataclass
class TrainResult:
    loss_trace: list[float] = field(default_factory=list)
    train_accuracy: float = 0.0


def _global_norm(grads: dict[str, np.ndarray]) -> float:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    return float(np.sqrt(total))


def train(model, dataset: list[tuple[object, int]], config: TrainConfig,
          ) -> TrainResult:
    """Train in place; deterministic given the seed.  The loss is
    cross-entropy (plus the multi-task type loss where applicable); L2 decay
    applies to the model's weight matrices at each update."""
    if not dataset:
        raise ValueError("dataset must be nonempty")
    for _, label in dataset:
        if label not in (0, 1):
            raise ValueError(f"labels must be 0/1, got {label!r}")

    rng = np.random.default_rng(config.seed)
    params = model.params()
    decay = set(getattr(model, "L2_PARAMS", ()))
    result = TrainResult()
    n = len(dataset)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            accum = {name: np.zeros_like(p) for name, p in params.items()}
            batch_loss = 0.0
            for i in batch:
                example, label = dataset[i]
                loss, grads = model.loss_and_grads(example, label)
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss {loss!r} at epoch {epoch}, "
                        f"example index {int(i)}")
                batch_loss += loss
                for name, g in grads.items():
                    accum[name] += g
            scale = 1.0 / len(batch)
            for name in accum:
                accum[name] *= scale
            norm = _global_norm(accum)
            if config.clip_norm > 0 and norm > config.clip_norm:
                clip_scale = config.clip_norm / norm
                for name in accum:
                    accum[name] *= clip_scale
            for name, p in params.items():
                g = accum[name]
                if name in decay:
                    g = g + config.l2 * p
                p -= config.learning_rate * g
            epoch_loss += batch_loss
        result.loss_trace.append(epoch_loss / n)
    result.train_accuracy = evaluate_accuracy(model, dataset)
    return result


def evaluate_accuracy(model, dataset: list[tuple[object, int]]) -> float:
    if not dataset:
        return 0.0
    correct = sum(1 for ex, label in dataset
                  if (model.forward(ex) >= 0.5) == bool(label))
    return correct / len(dataset)


def _clone_with_dtype(model, dtype):
    from .cnn import CNNClassifier
    from .embeddings import EmbeddingMatrix
    from .rnn import RNNClassifier

    emb = EmbeddingMatrix(model.emb.vocab, model.emb.vectors.astype(dtype))
    params = {k: v.astype(dtype) for k, v in model._params.items()}
    if model.kind == "cnn":
        return CNNClassifier(emb, filters=model.filters, width=model.width,
                             hidden=model.hidden, params=params)
    return RNNClassifier(emb, variant=model.variant, hidden=model.hidden,
                         type_dim=model.type_dim, params=params)


def gradient_check(model, example, label: int = 1,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central finite
    differences, over every parameter element (embeddings included).

    The check runs in extended precision: the difference quotient of two
    nearly equal float64 losses would otherwise drown near-zero gradients in
    cancellation noise.  For the multi-task RNN, the hard argmax type choices
    are frozen over the perturbations; a perturbation crossing a decision
    boundary would measure the jump of the piecewise-constant path rather
    than the gradient of the smooth piece the analytic backward computes.
    """
    work = _clone_with_dtype(model, np.longdouble)
    kwargs = {}
    if getattr(work, "variant", "") == "multitask":
        kwargs["frozen_choices"] = work._forward(example)["choices"]
    _, analytic = work.loss_and_grads(example, label, **kwargs)
    params = work.params()
    max_err = 0.0
    for name, arr in params.items():
        flat = arr.ravel()
        grad_flat = analytic[name].ravel()
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            loss_plus, _ = work.loss_and_grads(example, label, **kwargs)
            flat[i] = original - epsilon
            loss_minus, _ = work.loss_and_grads(example, label, **kwargs)
            flat[i] = original
            numeric = (loss_plus - loss_minus) / (2 * epsilon)
            ga = grad_flat[i]
            err = float(abs(ga - numeric) / max(abs(ga), abs(numeric), 1e-8))
            max_err = max(max_err, err)
    return max_err
