"""Shared independent oracles for the test suite.

These deliberately avoid the package's own data structures and algorithms
wherever they check one: tree enumeration by subset filtering, MIP optima
by full enumeration, connectivity by union-find.
"""

from __future__ import annotations

import itertools

import numpy as np

from nslearn.mip.model import MipInstance, check_feasible, objective_value
from nslearn.wno.instance import WnoInstance


def all_edges(n: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def is_spanning_tree(n: int, edges) -> bool:
    if len(edges) != n - 1:
        return False
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def all_spanning_trees(n: int) -> list[frozenset]:
    """Every labeled spanning tree on n nodes, by brute subset filtering."""
    out = []
    for combo in itertools.combinations(all_edges(n), n - 1):
        if is_spanning_tree(n, combo):
            out.append(frozenset(combo))
    return out


def brute_force_mip(instance: MipInstance):
    """(best assignment, best value) or (None, None) by full enumeration."""
    best, best_val = None, float("inf")
    for bits in itertools.product((0, 1), repeat=instance.n_vars):
        ok, _ = check_feasible(instance, bits)
        if ok:
            val = objective_value(instance, bits)
            if val < best_val:
                best, best_val = bits, val
    if best is None:
        return None, None
    return best, best_val


def uniform_radio_instance(n: int, path_loss_db: float = 100.0, fade_db: float = 10.0) -> WnoInstance:
    """All links identical; coordinates on a line (not used by objectives)."""
    pl = np.full((n, n), path_loss_db, dtype=float)
    fm = np.full((n, n), fade_db, dtype=float)
    np.fill_diagonal(pl, 0.0)
    np.fill_diagonal(fm, 0.0)
    coords = np.stack([np.arange(n, dtype=float), np.zeros(n)], axis=1)
    return WnoInstance(n=n, seed=0, coords=coords, path_loss=pl, fade_margin=fm)


def custom_radio_instance(weights: dict[tuple[int, int], float], n: int) -> WnoInstance:
    """path_loss carries the given per-pair values, fade margins are zero."""
    pl = np.zeros((n, n))
    for (u, v), w in weights.items():
        pl[u, v] = pl[v, u] = w
    fm = np.zeros((n, n))
    coords = np.zeros((n, 2))
    return WnoInstance(n=n, seed=0, coords=coords, path_loss=pl, fade_margin=fm)
