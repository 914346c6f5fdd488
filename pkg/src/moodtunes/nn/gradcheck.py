"""Central finite-difference verification of the backward pass.

The check runs in float64 (a cast copy of the model) so it measures
algorithmic error in backpropagation rather than float32 rounding noise.
"""

from __future__ import annotations

import numpy as np

from .model import Model, cross_entropy


def _loss(model: Model, x, true_class) -> float:
    probs = np.atleast_2d(model.forward(x))
    return float(cross_entropy(probs, true_class).sum())


def grad_check(
    model: Model,
    x,
    true_class,
    epsilon: float = 1e-3,
    max_checks_per_tensor: int | None = None,
    sample_seed: int = 0,
) -> float:
    """Max relative error between analytic and numeric gradients.

    Relative error per element is |a - n| / max(|a|, |n|, 1e-8). Every
    parameter element is perturbed unless max_checks_per_tensor caps the
    count, in which case a seeded random subset of each tensor is checked
    (large models would otherwise need millions of forward passes).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    m = model.astype(np.float64)
    _, grads = m.backward(x, true_class)
    rng = np.random.default_rng(sample_seed)

    worst = 0.0
    for layer_params, layer_grads in zip(m.params, grads):
        for name, grad in layer_grads.items():
            p = layer_params[name]
            flat_p = p.reshape(-1)
            flat_g = grad.reshape(-1)
            if max_checks_per_tensor is not None and flat_p.size > max_checks_per_tensor:
                indices = rng.choice(flat_p.size, size=max_checks_per_tensor, replace=False)
            else:
                indices = range(flat_p.size)
            for idx in indices:
                orig = flat_p[idx]
                flat_p[idx] = orig + epsilon
                plus = _loss(m, x, true_class)
                flat_p[idx] = orig - epsilon
                minus = _loss(m, x, true_class)
                flat_p[idx] = orig
                numeric = (plus - minus) / (2.0 * epsilon)
                analytic = float(flat_g[idx])
                denom = max(abs(analytic), abs(numeric), 1e-8)
                worst = max(worst, abs(analytic - numeric) / denom)
    return worst
