"""Training loop: per-graph stochastic steps with adaptive moments.

Step size 1e-3, moment decays 0.9/0.999, epsilon 1e-8, mini-batch of one
graph, a fixed number of epochs, and checkpoint selection by the best
validation loss (earliest epoch on ties). Fully deterministic for a fixed
seed. Feature standardization statistics are fitted on the training split
only and stored with the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import BipartiteGraph, FeatureGraph, LabeledSample
from .losses import LossSpec
from .model import (
    Arch,
    BipartiteArch,
    FeatureStats,
    GraphArch,
    PolicyModel,
    forward_backward,
    forward_probs,
    init_model,
)

__all__ = ["TrainConfig", "TrainResult", "train", "infer_arch", "positive_rate"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    hidden: int = 32
    layers: int = 2


@dataclass
class TrainResult:
    model: PolicyModel
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0


def infer_arch(sample: LabeledSample, hidden: int = 32, layers: int = 2) -> Arch:
    s = sample.state
    if isinstance(s, FeatureGraph):
        return GraphArch(
            node_dim=s.node_features.shape[1],
            edge_dim=s.edge_features.shape[1],
            hidden=hidden,
            layers=layers,
        )
    return BipartiteArch(
        var_dim=s.var_features.shape[1],
        cons_dim=s.cons_features.shape[1],
        edge_dim=s.edge_features.shape[1],
        hidden=hidden,
        layers=layers,
    )


def positive_rate(samples: list[LabeledSample]) -> float:
    total = sum(int(s.label.size) for s in samples)
    pos = sum(int(s.label.sum()) for s in samples)
    return pos / total if total else 0.0


def _fit_stats(samples: list[LabeledSample]) -> FeatureStats:
    first = samples[0].state
    if isinstance(first, FeatureGraph):
        rows = {"node": [], "edge": []}
        for s in samples:
            rows["node"].append(s.state.node_features)
            rows["edge"].append(s.state.edge_features)
    else:
        rows = {"var": [], "cons": [], "edge": []}
        for s in samples:
            rows["var"].append(s.state.var_features)
            rows["cons"].append(s.state.cons_features)
            rows["edge"].append(s.state.edge_features)
    return FeatureStats.fit(rows)


def _mean_loss(model: PolicyModel, samples: list[LabeledSample], loss: LossSpec) -> float:
    if not samples:
        return float("nan")
    total = 0.0
    for s in samples:
        probs = forward_probs(model, s.state)
        total += loss.value(probs, s.label)
    return total / len(samples)


def train(
    train_samples: list[LabeledSample],
    val_samples: list[LabeledSample],
    loss: LossSpec,
    seed: int,
    config: TrainConfig | None = None,
    arch: Arch | None = None,
) -> TrainResult:
    if not train_samples:
        raise ValueError("training dataset is empty")
    config = config or TrainConfig()
    kinds = {type(s.state) for s in train_samples + val_samples}
    if len(kinds) != 1:
        raise ValueError("samples are not homogeneous in variant")

    if loss.kind == "focal" and loss.alpha is None:
        loss = LossSpec(
            kind="focal",
            lam=loss.lam,
            alpha=min(1.0, max(1e-3, 1.0 - positive_rate(train_samples))),
            gamma=loss.gamma,
        )

    arch = arch or infer_arch(train_samples[0], hidden=config.hidden, layers=config.layers)
    stats = _fit_stats(train_samples)
    model = init_model(arch, seed=seed, stats=stats)
    model.meta.update({"loss": loss.to_dict(), "trained_on": len(train_samples)})

    rng = np.random.default_rng(seed)
    m = np.zeros_like(model.theta)
    v = np.zeros_like(model.theta)
    t = 0

    best_theta = model.theta.copy()
    best_val = float("inf")
    best_epoch = 0
    train_curve: list[float] = []
    val_curve: list[float] = []
    have_val = len(val_samples) > 0

    for epoch in range(config.epochs):
        order = rng.permutation(len(train_samples))
        epoch_loss = 0.0
        for idx in order:
            s = train_samples[idx]
            _, sample_loss, grad = forward_backward(
                model, s.state, lambda probs: loss.value_and_dlogits(probs, s.label)
            )
            epoch_loss += sample_loss
            t += 1
            m = config.beta1 * m + (1 - config.beta1) * grad
            v = config.beta2 * v + (1 - config.beta2) * grad * grad
            m_hat = m / (1 - config.beta1**t)
            v_hat = v / (1 - config.beta2**t)
            model.theta -= config.step_size * m_hat / (np.sqrt(v_hat) + config.epsilon)
        train_loss = epoch_loss / len(train_samples)
        # checkpoint on training loss when there is no validation split
        val_loss = _mean_loss(model, val_samples, loss) if have_val else train_loss
        train_curve.append(train_loss)
        val_curve.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_theta = model.theta.copy()
            best_epoch = epoch

    model.theta = best_theta
    model.meta["best_epoch"] = best_epoch
    return TrainResult(
        model=model, train_losses=train_curve, val_losses=val_curve, best_epoch=best_epoch
    )
