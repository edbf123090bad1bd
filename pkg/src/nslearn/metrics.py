"""Scaled primal gap and primal integral.

The gap scales the distance to the best-known value by the distance the
initial solution had to cover; the integral accumulates the gap of the
incumbent over wall-clock time, counting 1 before the first incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import IncumbentLog

__all__ = ["primal_gap", "primal_integral", "CellResult", "MetricReport"]


def primal_gap(objective: float, opt_value: float, init_value: float, sense: str) -> float:
    """|opt - obj| / |opt - init|, clamped to [0, 1].

    When the initial solution already matches the best-known value the gap
    is defined as 0 (the instance was solved at initialization); sense only
    matters upstream when deciding what counts as the best-known value.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    denom = abs(opt_value - init_value)
    if denom == 0.0:
        return 0.0
    gap = abs(opt_value - objective) / denom
    return min(1.0, max(0.0, gap))


def primal_integral(
    log: IncumbentLog, opt_value: float, init_value: float, t_max: float
) -> float:
    """Exact integral of the piecewise-constant gap profile on [0, t_max]."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    events = [(t, v) for t, v in log.events if t <= t_max]
    if not events:
        return t_max
    total = 0.0
    # gap is 1 until the first incumbent appears
    first_t = events[0][0]
    total += 1.0 * min(first_t, t_max)
    for i, (t, v) in enumerate(events):
        t_next = events[i + 1][0] if i + 1 < len(events) else t_max
        gap = primal_gap(v, opt_value, init_value, log.sense)
        total += gap * (t_next - t)
    return total


@dataclass
class CellResult:
    """One (instance, algorithm, seed) run of the experiment matrix."""

    instance: str
    algorithm: str
    seed: int
    iterations: int
    best_value: float
    time_to_best: float
    events: list[tuple[float, float]]
    primal_integral: float | None = None


@dataclass
class MetricReport:
    t_max: float
    sense: str
    cells: list[CellResult] = field(default_factory=list)

    def aggregates(self) -> dict[str, dict[str, float]]:
        """Arithmetic means of the per-cell measures, keyed by algorithm."""
        by_alg: dict[str, list[CellResult]] = {}
        for c in self.cells:
            by_alg.setdefault(c.algorithm, []).append(c)
        out = {}
        for alg, cells in sorted(by_alg.items()):
            n = len(cells)
            out[alg] = {
                "cells": n,
                "mean_primal_integral": sum(c.primal_integral for c in cells) / n,
                "mean_iterations": sum(c.iterations for c in cells) / n,
                "mean_best_value": sum(c.best_value for c in cells) / n,
                "mean_time_to_best": sum(c.time_to_best for c in cells) / n,
            }
        return out
