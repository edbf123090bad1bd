"""Classification losses for imbalanced improving/non-improving labels.

Both losses consume the improving-class probability per item. Probabilities
are clamped to [1e-12, 1-1e-12] before any log. The weighted cross entropy
takes a penalty factor lam in [0.5, 1] on the improving class; at lam=0.5
it reduces to half the plain cross entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["wce_loss", "focal_loss", "cross_entropy", "LossSpec"]

P_CLAMP = 1e-12


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, P_CLAMP, 1.0 - P_CLAMP)


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    p = _clamp(np.asarray(probs, dtype=float))
    y = np.asarray(labels, dtype=float)
    return float(np.mean(-y * np.log(p) - (1.0 - y) * np.log(1.0 - p)))


def wce_loss(probs: np.ndarray, labels: np.ndarray, lam: float) -> float:
    if not 0.5 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0.5, 1]")
    p = _clamp(np.asarray(probs, dtype=float))
    y = np.asarray(labels, dtype=float)
    terms = -lam * y * np.log(p) - (1.0 - lam) * (1.0 - y) * np.log(1.0 - p)
    return float(terms.mean())


def focal_loss(probs: np.ndarray, labels: np.ndarray, alpha: float, gamma: float) -> float:
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    p = _clamp(np.asarray(probs, dtype=float))
    y = np.asarray(labels, dtype=float)
    p_t = np.where(y == 1.0, p, 1.0 - p)
    terms = -alpha * (1.0 - p_t) ** gamma * np.log(p_t)
    return float(terms.mean())


@dataclass(frozen=True)
class LossSpec:
    """Which loss to train with; alpha=None means 'fit from class frequency'."""

    kind: str = "wce"
    lam: float = 0.7
    alpha: float | None = None
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in ("wce", "focal"):
            raise ValueError("loss kind must be 'wce' or 'focal'")

    def value(self, prob_pairs: np.ndarray, labels: np.ndarray) -> float:
        p1 = prob_pairs[:, 1]
        if self.kind == "wce":
            return wce_loss(p1, labels, self.lam)
        alpha = 0.5 if self.alpha is None else self.alpha
        return focal_loss(p1, labels, alpha, self.gamma)

    def value_and_dlogits(self, prob_pairs: np.ndarray, labels: np.ndarray):
        """Loss plus its gradient with respect to the two logits per item.

        Where the probability clamp binds, the computed loss is locally
        constant in the parameters, so those items contribute zero gradient.
        """
        y = np.asarray(labels, dtype=float)
        p1 = prob_pairs[:, 1]
        p0 = prob_pairs[:, 0]
        in_band = ((p1 >= P_CLAMP) & (p1 <= 1.0 - P_CLAMP)).astype(float)
        c = max(1, len(y))
        loss = self.value(prob_pairs, labels)
        if self.kind == "wce":
            dz1 = (-self.lam * y * p0 + (1.0 - self.lam) * (1.0 - y) * p1) / c
        else:
            alpha = 0.5 if self.alpha is None else self.alpha
            p = _clamp(p1)
            p_t = np.where(y == 1.0, p, 1.0 - p)
            dldpt = -alpha * (1.0 - p_t) ** self.gamma / p_t
            if self.gamma > 0:
                dldpt = dldpt + alpha * self.gamma * (1.0 - p_t) ** (self.gamma - 1.0) * np.log(p_t)
            sign = np.where(y == 1.0, 1.0, -1.0)
            dz1 = dldpt * sign * p1 * p0 / c
        dz1 = dz1 * in_band
        dlogits = np.stack([-dz1, dz1], axis=1)
        return loss, dlogits

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lam": self.lam, "alpha": self.alpha, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "LossSpec":
        return cls(
            kind=d.get("kind", "wce"),
            lam=d.get("lam", 0.7),
            alpha=d.get("alpha"),
            gamma=d.get("gamma", 2.0),
        )
