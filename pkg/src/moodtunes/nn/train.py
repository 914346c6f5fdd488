"""SGD-with-momentum training over fixed layer stacks.

Training is deterministic: epoch shuffling is driven solely by the config
seed, batches keep dataset order within the permutation, and gradient
summation order is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Model


class EmptyDataset(ValueError):
    """Training called with no samples."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 20
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        # lr 0 and epochs 0 are allowed: both mean "change nothing" and
        # are useful as no-op baselines
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")


def init_velocity(model: Model) -> list[dict[str, np.ndarray]]:
    return [{k: np.zeros_like(v) for k, v in d.items()} for d in model.params]


def sgd_step(model: Model, gradients, config: TrainConfig, velocity=None) -> Model:
    """One in-place update: v <- momentum*v + g; p <- p - lr*v.

    Pass the velocity from init_velocity to carry momentum across steps;
    omitting it is a plain (zero-momentum-history) step.
    """
    if velocity is None:
        velocity = init_velocity(model)
    for params, grads, vel in zip(model.params, gradients, velocity):
        for name, g in grads.items():
            if g.shape != params[name].shape:
                raise ValueError(
                    f"gradient shape {g.shape} != parameter shape {params[name].shape}"
                )
            v = vel[name]
            v *= config.momentum
            v += g.astype(v.dtype, copy=False)
            params[name] -= (config.learning_rate * v).astype(params[name].dtype, copy=False)
    return model


def train(model: Model, dataset, config: TrainConfig) -> tuple[Model, list[float]]:
    """Train a copy of ``model``; returns (trained model, per-epoch mean loss).

    The input model is left untouched. Batch gradients are averaged over
    the batch before each step.
    """
    if not dataset:
        raise EmptyDataset("dataset is empty")
    trained = model.copy()
    velocity = init_velocity(trained)
    rng = np.random.default_rng(config.seed)
    n = len(dataset)
    inputs = [np.asarray(x) for x, _ in dataset]
    labels = np.asarray([int(t) for _, t in dataset], dtype=np.int64)

    history: list[float] = []
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch_idx = perm[start : start + config.batch_size]
            xb = np.stack([inputs[i] for i in batch_idx])
            tb = labels[batch_idx]
            loss_sum, grads = trained.backward(xb, tb)
            epoch_loss += loss_sum
            scale = 1.0 / len(batch_idx)
            mean_grads = [
                {k: v * scale for k, v in d.items()} for d in grads
            ]
            sgd_step(trained, mean_grads, config, velocity)
        history.append(epoch_loss / n)
    return trained, history


def predict_classes(model: Model, inputs) -> np.ndarray:
    """Argmax class per sample; ties take the lowest class index."""
    xb = np.stack([np.asarray(x) for x in inputs])
    probs = model.forward(xb)
    return np.argmax(probs, axis=-1)
