"""Synthetic tactical-network instances.

Node coordinates follow the polar-style sampling form
(x, y) = (sqrt(U0) cos(2*pi*U1), sqrt(U2) sin(2*pi*U3)) with IID uniforms,
rescaled so the mean pairwise distance is exactly 10 km and redrawn in full
until the minimum pairwise distance exceeds 2 km and the maximum stays
below 150 km. Radio quantities use a log-distance path-loss surrogate with
lognormal-style shadowing and uniform fade margins (the original empirical
North-American CDFs are not available).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["WnoInstance", "generate_instance"]

MEAN_PAIR_DIST_KM = 10.0
MIN_PAIR_DIST_KM = 2.0
MAX_PAIR_DIST_KM = 150.0
PATH_LOSS_BOUNDS_DB = (80.0, 160.0)


@dataclass(frozen=True, eq=False)
class WnoInstance:
    n: int
    seed: int
    coords: np.ndarray       # (n, 2) km
    path_loss: np.ndarray    # (n, n) dB, symmetric, zero diagonal
    fade_margin: np.ndarray  # (n, n) dB, symmetric, zero diagonal

    def pairwise_distances(self) -> np.ndarray:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))

    def link_weight(self) -> np.ndarray:
        """path_loss + fade_margin; the MST edge weight."""
        return self.path_loss + self.fade_margin

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "seed": self.seed,
                "coords": self.coords.tolist(),
                "path_loss": self.path_loss.tolist(),
                "fade_margin": self.fade_margin.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "WnoInstance":
        d = json.loads(text)
        return cls(
            n=int(d["n"]),
            seed=int(d["seed"]),
            coords=np.asarray(d["coords"], dtype=float),
            path_loss=np.asarray(d["path_loss"], dtype=float),
            fade_margin=np.asarray(d["fade_margin"], dtype=float),
        )


def _draw_coords(rng: np.random.Generator, n: int) -> np.ndarray | None:
    u = rng.random((n, 4))
    x = np.sqrt(u[:, 0]) * np.cos(2 * np.pi * u[:, 1])
    y = np.sqrt(u[:, 2]) * np.sin(2 * np.pi * u[:, 3])
    pts = np.stack([x, y], axis=1)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    iu = np.triu_indices(n, 1)
    mean = dist[iu].mean()
    if mean == 0.0:
        return None
    pts = pts * (MEAN_PAIR_DIST_KM / mean)
    dist = dist * (MEAN_PAIR_DIST_KM / mean)
    if dist[iu].min() > MIN_PAIR_DIST_KM and dist[iu].max() < MAX_PAIR_DIST_KM:
        return pts
    return None


def generate_instance(n: int, seed: int, max_attempts: int = 100_000) -> WnoInstance:
    """Draw a fresh instance; fully deterministic in (n, seed).

    The min/max distance constraints get rapidly harder to satisfy as n
    grows (at n=30 the acceptance rate is effectively zero), hence the
    attempt cap with a loud failure instead of a silent hang.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    rng = np.random.default_rng(seed)
    coords = None
    for _ in range(max_attempts):
        coords = _draw_coords(rng, n)
        if coords is not None:
            break
    if coords is None:
        raise RuntimeError(
            f"no coordinate draw satisfied the distance constraints in {max_attempts} attempts (n={n})"
        )

    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))

    path_loss = np.zeros((n, n))
    fade = np.zeros((n, n))
    lo, hi = PATH_LOSS_BOUNDS_DB
    for u in range(n):
        for v in range(u + 1, n):
            pl = 100.0 + 20.0 * np.log10(dist[u, v]) + rng.normal(0.0, 5.0)
            path_loss[u, v] = path_loss[v, u] = min(hi, max(lo, pl))
    for u in range(n):
        for v in range(u + 1, n):
            fade[u, v] = fade[v, u] = rng.uniform(5.0, 15.0)

    return WnoInstance(n=n, seed=seed, coords=coords, path_loss=path_loss, fade_margin=fade)
