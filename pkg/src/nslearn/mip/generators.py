"""Synthetic binary MIP families: set cover and knapsack-with-conflicts.

Both are deterministic in their seed, use exact integer data (so the 1e-9
feasibility tolerance never matters), and admit an obvious feasible point
(all-ones for covering, all-zeros for packing).
"""

from __future__ import annotations

import math

import numpy as np

from .model import Constraint, MipInstance

__all__ = ["generate_set_cover", "generate_knapsack_conflicts"]


def generate_set_cover(
    n_cols: int,
    n_rows: int,
    density: float,
    cost_range: tuple[int, int],
    seed: int,
) -> MipInstance:
    """Minimize total column cost subject to one >=1 covering row per element.

    Each row draws round(density * n_cols) distinct columns; rows must hold
    at least 2 columns, so too small a density is an error.
    """
    if n_cols < 2 or n_rows < 1:
        raise ValueError("need n_cols >= 2 and n_rows >= 1")
    k = int(round(density * n_cols))
    if k < 2:
        raise ValueError(f"density {density} gives rows of {k} < 2 columns")
    lo, hi = cost_range
    if lo > hi:
        raise ValueError("empty cost range")
    rng = np.random.default_rng(seed)
    costs = rng.integers(lo, hi + 1, size=n_cols)
    rows = []
    for _ in range(n_rows):
        cols = np.sort(rng.choice(n_cols, size=k, replace=False))
        rows.append(
            Constraint(
                idx=tuple(int(j) for j in cols),
                coef=tuple(1.0 for _ in cols),
                rel=">=",
                rhs=1.0,
            )
        )
    return MipInstance(
        n_vars=n_cols,
        objective=tuple(float(c) for c in costs),
        constraints=tuple(rows),
        name=f"setcover_c{n_cols}_r{n_rows}_s{seed}",
    )


def generate_knapsack_conflicts(
    n_items: int,
    n_conflicts: int,
    value_range: tuple[int, int],
    weight_range: tuple[int, int],
    capacity_fraction: float,
    seed: int,
) -> MipInstance:
    """Max-value knapsack with pairwise conflicts, stated as minimization of
    the negated values. The all-zeros point is always feasible."""
    if n_items < 2:
        raise ValueError("need n_items >= 2")
    max_pairs = n_items * (n_items - 1) // 2
    if not 0 <= n_conflicts <= max_pairs:
        raise ValueError("conflict count out of range")
    rng = np.random.default_rng(seed)
    values = rng.integers(value_range[0], value_range[1] + 1, size=n_items)
    weights = rng.integers(weight_range[0], weight_range[1] + 1, size=n_items)
    capacity = float(math.floor(capacity_fraction * weights.sum()))

    rows = [
        Constraint(
            idx=tuple(range(n_items)),
            coef=tuple(float(w) for w in weights),
            rel="<=",
            rhs=capacity,
        )
    ]
    pairs = rng.choice(max_pairs, size=n_conflicts, replace=False)
    all_pairs = [(i, j) for i in range(n_items) for j in range(i + 1, n_items)]
    for p in np.sort(pairs):
        i, j = all_pairs[int(p)]
        rows.append(Constraint(idx=(i, j), coef=(1.0, 1.0), rel="<=", rhs=1.0))
    return MipInstance(
        n_vars=n_items,
        objective=tuple(-float(v) for v in values),
        constraints=tuple(rows),
        name=f"knapconf_n{n_items}_k{n_conflicts}_s{seed}",
    )
