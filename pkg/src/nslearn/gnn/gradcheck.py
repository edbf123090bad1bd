"""Finite-difference validation of the analytic parameter gradients."""

from __future__ import annotations

import numpy as np

from .graphs import LabeledSample
from .losses import LossSpec
from .model import PolicyModel, forward_backward, forward_probs

__all__ = ["gradient_check"]


def gradient_check(
    model: PolicyModel,
    sample: LabeledSample,
    loss: LossSpec,
    n_coords: int = 50,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Probes min(n_coords, |theta|) distinct random coordinates; the relative
    error is |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|).
    """
    if not np.isfinite(model.theta).all():
        raise ValueError("model parameters must be finite")
    _, _, grad = forward_backward(
        model, sample.state, lambda probs: loss.value_and_dlogits(probs, sample.label)
    )

    rng = np.random.default_rng(seed)
    n = model.theta.size
    coords = rng.choice(n, size=min(n_coords, n), replace=False)

    theta = model.theta
    worst = 0.0
    for k in coords:
        orig = theta[k]
        theta[k] = orig + step
        lp = loss.value(forward_probs(model, sample.state), sample.label)
        theta[k] = orig - step
        lm = loss.value(forward_probs(model, sample.state), sample.label)
        theta[k] = orig
        g_fd = (lp - lm) / (2 * step)
        g_a = grad[k]
        err = abs(g_a - g_fd) / max(1e-8, abs(g_a) + abs(g_fd))
        worst = max(worst, err)
    return worst
