"""Large neighborhood search with pluggable destroy policies, plus the
local-branching baseline runner.

The destroy step frees at most k_max variables (random sample, or the
learned policy's greedy/sampled mask truncated to the k_max most probable
picks); the repair step re-optimizes the sub-MIP with everything else fixed,
warm-started at the incumbent so it can never get worse; acceptance is
strict improvement only.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import IncumbentLog, SelectionMask, Termination, decide_greedy, decide_sample, fallback_topk
from ..gnn.model import PolicyModel, bipartite_forward
from .model import MipInstance, objective_value, to_bipartite_graph
from .solver import SolveResult, lb_step, solve

__all__ = [
    "DestroyPolicy",
    "destroy",
    "repair",
    "LnsRunResult",
    "lns_run",
    "lb_baseline_run",
    "DEFAULT_K_MAX",
    "DEFAULT_REPAIR_NODE_LIMIT",
    "DEFAULT_REPAIR_TIME_LIMIT",
]

DEFAULT_K_MAX = 40
DEFAULT_REPAIR_NODE_LIMIT = 20_000
DEFAULT_REPAIR_TIME_LIMIT = 2.0

POLICY_KINDS = ("random", "gnn-greedy", "gnn-sample")


@dataclass
class DestroyPolicy:
    kind: str = "random"
    k_max: int = DEFAULT_K_MAX
    model: Optional[PolicyModel] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind must be one of {POLICY_KINDS}")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.kind.startswith("gnn") and self.model is None:
            raise ValueError(f"kind {self.kind} needs a policy model")
        self._rng = np.random.default_rng(self.seed)


def _truncate_to_k(mask: SelectionMask, probs: np.ndarray, k: int) -> SelectionMask:
    """Keep the k highest-probability selections (ties to the lowest index)."""
    if mask.count() <= k:
        return mask
    selected = mask.indices()
    order = sorted(selected, key=lambda i: (-probs[i], i))
    keep = set(order[:k])
    return SelectionMask(tuple(1 if i in keep else 0 for i in range(len(mask))))


def destroy(policy: DestroyPolicy, instance: MipInstance, x_bar) -> SelectionMask:
    """Select the variables to free (1 = freed); at most k_max of them."""
    n = instance.n_vars
    k = min(policy.k_max, n)
    if policy.kind == "random":
        chosen = set(int(i) for i in policy._rng.choice(n, size=k, replace=False))
        return SelectionMask(tuple(1 if i in chosen else 0 for i in range(n)))
    probs = bipartite_forward(policy.model, to_bipartite_graph(instance, x_bar))[:, 1]
    if policy.kind == "gnn-greedy":
        mask = decide_greedy(probs)
    else:
        mask = decide_sample(probs, int(policy._rng.integers(2**63)))
    mask = _truncate_to_k(mask, probs, k)
    return fallback_topk(mask, probs, k=1)


def repair(
    instance: MipInstance,
    x_bar,
    mask: SelectionMask,
    node_limit: int | None = DEFAULT_REPAIR_NODE_LIMIT,
    time_limit: float | None = DEFAULT_REPAIR_TIME_LIMIT,
) -> tuple[int, ...]:
    """Re-optimize with the unmasked variables fixed to the incumbent.

    The incumbent sits inside the sub-MIP, so the result is never worse."""
    x = [int(v) for v in x_bar]
    fixed = {i: x[i] for i, b in enumerate(mask.bits) if b == 0}
    res = solve(
        instance,
        fixed=fixed,
        node_limit=node_limit,
        time_limit=time_limit,
        warm_start=x,
    )
    return res.best


@dataclass
class LnsRunResult:
    best: tuple[int, ...]
    best_value: float
    log: IncumbentLog
    iterations: int
    policy: str
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "policy": self.policy,
                "seed": self.seed,
                "iterations": self.iterations,
                "best_value": self.best_value,
                "incumbent_log": [[t, v] for t, v in self.log.events],
            }
        )


def lns_run(
    instance: MipInstance,
    initial,
    policy: DestroyPolicy,
    termination: Termination,
    repair_node_limit: int | None = DEFAULT_REPAIR_NODE_LIMIT,
    repair_time_limit: float | None = DEFAULT_REPAIR_TIME_LIMIT,
) -> LnsRunResult:
    """Iterate destroy/repair from a feasible start, accepting strict
    improvements; the incumbent log is therefore strictly decreasing."""
    start = time.perf_counter()
    log = IncumbentLog("min")
    x = tuple(int(v) for v in initial)
    x_val = objective_value(instance, x)
    log.record(0.0, x_val)

    iterations = 0
    while not termination.done(time.perf_counter() - start, iterations):
        mask = destroy(policy, instance, x)
        x_new = repair(instance, x, mask, repair_node_limit, repair_time_limit)
        new_val = objective_value(instance, x_new)
        if new_val < x_val:
            x, x_val = tuple(x_new), new_val
            log.record(time.perf_counter() - start, x_val)
        iterations += 1

    return LnsRunResult(
        best=x,
        best_value=x_val,
        log=log,
        iterations=iterations,
        policy=policy.kind,
        seed=policy.seed,
    )


def lb_baseline_run(
    instance: MipInstance,
    initial,
    k: int,
    termination: Termination,
    step_node_limit: int | None = DEFAULT_REPAIR_NODE_LIMIT,
    step_time_limit: float | None = DEFAULT_REPAIR_TIME_LIMIT,
) -> LnsRunResult:
    """Repeated local-branching steps from the incumbent, adopting improvements."""
    if k < 1:
        raise ValueError("k must be >= 1")
    start = time.perf_counter()
    log = IncumbentLog("min")
    x = tuple(int(v) for v in initial)
    x_val = objective_value(instance, x)
    log.record(0.0, x_val)

    iterations = 0
    while not termination.done(time.perf_counter() - start, iterations):
        res: SolveResult = lb_step(
            instance, x, k, node_limit=step_node_limit, time_limit=step_time_limit
        )
        if res.best is not None and res.best_value < x_val:
            x, x_val = res.best, res.best_value
            log.record(time.perf_counter() - start, x_val)
        iterations += 1

    return LnsRunResult(
        best=x, best_value=x_val, log=log, iterations=iterations, policy="lb", seed=0
    )
