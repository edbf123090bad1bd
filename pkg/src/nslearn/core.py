"""Generic neighborhood-search loop and mask-decision strategies.

A solution neighborhood is produced by an operator that may only touch a
selected subset of items; the selection itself is a binary mask over an
index set. This module holds the mask type, the strategies that turn
per-item probabilities into masks, the incumbent log consumed by the
benchmark metrics, and the plain best-neighbor descent loop shared by the
two applications.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "SelectionMask",
    "SearchState",
    "OperatorParams",
    "IncumbentLog",
    "Termination",
    "decide_greedy",
    "decide_sample",
    "fallback_topk",
    "run_ns",
]


@dataclass(frozen=True)
class SelectionMask:
    """Binary selection over an item index set (1 = selected)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask entries must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def count(self) -> int:
        return sum(self.bits)

    def indices(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]


@dataclass(frozen=True)
class SearchState:
    """Current solution plus the feature bundle derived from it.

    Features must be a pure function of (instance, solution, configuration)
    so that policy evaluations are reproducible.
    """

    solution: Any
    features: Any = None


@dataclass(frozen=True)
class OperatorParams:
    """Opaque parameter bundle for parameterized transformation operators."""

    params: dict = field(default_factory=dict)


class IncumbentLog:
    """Time-stamped strictly improving incumbent objective values."""

    def __init__(self, sense: str):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.events: list[tuple[float, float]] = []
        self.notes: list[str] = []

    def improves(self, objective: float) -> bool:
        if not self.events:
            return True
        last = self.events[-1][1]
        return objective < last if self.sense == "min" else objective > last

    def record(self, elapsed: float, objective: float) -> None:
        if not self.improves(objective):
            raise ValueError(
                f"objective {objective} does not improve on {self.events[-1][1]} ({self.sense})"
            )
        if self.events and elapsed <= self.events[-1][0]:
            # clock ties happen when improvements land within timer resolution
            elapsed = np.nextafter(self.events[-1][0], np.inf)
        self.events.append((float(elapsed), float(objective)))

    @property
    def best(self) -> Optional[float]:
        return self.events[-1][1] if self.events else None

    @property
    def time_to_best(self) -> Optional[float]:
        return self.events[-1][0] if self.events else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("elapsed_seconds,objective\n")
        for t, v in self.events:
            buf.write(f"{t!r},{v!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, sense: str) -> "IncumbentLog":
        log = cls(sense)
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0] != "elapsed_seconds,objective":
            raise ValueError("bad incumbent log header")
        for ln in lines[1:]:
            t, v = ln.split(",")
            log.record(float(t), float(v))
        return log


@dataclass(frozen=True)
class Termination:
    """Wall-clock and/or iteration budget; at least one must be set."""

    max_seconds: Optional[float] = None
    max_iterations: Optional[int] = None

    def __post_init__(self):
        if self.max_seconds is None and self.max_iterations is None:
            raise ValueError("termination needs a time limit or an iteration limit")

    def done(self, elapsed: float, iterations: int) -> bool:
        if self.max_seconds is not None and elapsed >= self.max_seconds:
            return True
        if self.max_iterations is not None and iterations >= self.max_iterations:
            return True
        return False


def decide_greedy(probabilities: Sequence[float]) -> SelectionMask:
    """Select every item whose improving-class probability exceeds 0.5.

    The tie at exactly 0.5 resolves to "not selected" so the mask stays
    small and the rule is deterministic.
    """
    return SelectionMask(tuple(1 if p > 0.5 else 0 for p in probabilities))


def decide_sample(probabilities: Sequence[float], rng_seed: int) -> SelectionMask:
    """Independent Bernoulli draw per item, reproducible for equal seeds."""
    rng = np.random.default_rng(rng_seed)
    draws = rng.random(len(probabilities))
    return SelectionMask(
        tuple(1 if d < p else 0 for d, p in zip(draws, probabilities))
    )


def fallback_topk(mask: SelectionMask, probabilities: Sequence[float], k: int) -> SelectionMask:
    """Replace an all-zero mask by the k most probable items.

    Ties break toward the lowest index; k beyond the item count selects all.
    A nonempty mask passes through unchanged.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mask.count() > 0:
        return mask
    n = len(probabilities)
    k = min(k, n)
    order = np.argsort(-np.asarray(probabilities, dtype=float), kind="stable")
    chosen = set(int(i) for i in order[:k])
    return SelectionMask(tuple(1 if i in chosen else 0 for i in range(n)))


def run_ns(
    instance: Any,
    initial_solution: Any,
    neighbor_fn: Callable[[Any, Any], Iterable[Any]],
    objective_fn: Callable[[Any, Any], float],
    sense: str,
    termination: Termination,
) -> tuple[Any, IncumbentLog]:
    """Best-neighbor descent: move to the best neighbor each iteration.

    The move is made even when non-improving; the returned solution is the
    best one evaluated. An empty neighborhood ends the loop early (noted in
    the log, not an error).
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    better = (lambda a, b: a < b) if sense == "min" else (lambda a, b: a > b)

    start = time.perf_counter()
    log = IncumbentLog(sense)
    current = initial_solution
    current_val = objective_fn(instance, current)
    best, best_val = current, current_val
    log.record(0.0, best_val)

    iterations = 0
    while not termination.done(time.perf_counter() - start, iterations):
        chosen = None
        chosen_val = None
        for cand in neighbor_fn(instance, current):
            val = objective_fn(instance, cand)
            if chosen is None or better(val, chosen_val):
                chosen, chosen_val = cand, val
        if chosen is None:
            log.notes.append(f"empty neighborhood at iteration {iterations}")
            break
        current, current_val = chosen, chosen_val
        if better(current_val, best_val):
            best, best_val = current, current_val
            log.record(time.perf_counter() - start, best_val)
        iterations += 1
    return best, log
