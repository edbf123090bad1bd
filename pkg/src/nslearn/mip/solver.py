"""Exact depth-first branch-and-bound for small binary MIPs.

Stands in for an external solver at desk scale: it is the LNS repair engine
and the local-branching expert's engine. Pruning combines optimistic
per-row activity bounds, the valid objective lower bound
fixed_cost + sum_free min(0, c_j), and unit propagation on >=-rows whose
last undecided positive-coefficient variable is forced. Branching picks the
free variable with the largest |c_j| (ties to the lowest index) and tries
the cost-reducing value first. Fully deterministic, including node counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .model import FEAS_TOL, MipInstance, add_local_branching_constraint, objective_value

__all__ = ["SolveResult", "solve", "lb_step"]


@dataclass(frozen=True)
class SolveResult:
    status: str  # "optimal" | "feasible_limit_hit" | "infeasible"
    best: tuple[int, ...] | None
    best_value: float | None
    nodes_explored: int


class _Search:
    def __init__(self, instance: MipInstance):
        n = instance.n_vars
        rows = instance.constraints
        m = len(rows)
        self.n = n
        self.m = m
        self.cost = np.asarray(instance.objective, dtype=float)

        self.rel = np.array([{"<=": 0, "=": 1, ">=": 2}[c.rel] for c in rows], dtype=np.int8)
        self.rhs = np.array([c.rhs for c in rows], dtype=float)
        self.is_leq = (self.rel == 0) | (self.rel == 1)
        self.is_geq = (self.rel == 2) | (self.rel == 1)
        self.geq_rows = np.where(self.rel == 2)[0]

        self.row_idx = [np.array(c.idx, dtype=np.int64) for c in rows]
        self.row_coef = [np.array(c.coef, dtype=float) for c in rows]
        cols: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, c in enumerate(rows):
            for j, a in zip(c.idx, c.coef):
                cols[j].append((i, a))
        self.col_rows = [np.array([r for r, _ in col], dtype=np.int64) for col in cols]
        self.col_coefs = [np.array([a for _, a in col], dtype=float) for col in cols]

        # branch order: largest |c| first, ties to the lowest index
        self.order = np.lexsort((np.arange(n), -np.abs(self.cost)))

        self.values = np.full(n, -1, dtype=np.int8)
        self.fixed_act = np.zeros(m)
        self.pos_rem = np.zeros(m)
        self.neg_rem = np.zeros(m)
        self.pos_free_cnt = np.zeros(m, dtype=np.int64)
        for i in range(m):
            coef = self.row_coef[i]
            self.pos_rem[i] = coef[coef > 0].sum()
            self.neg_rem[i] = coef[coef < 0].sum()
            self.pos_free_cnt[i] = int((coef > 0).sum())
        self.fixed_cost = 0.0
        self.neg_cost_rem = float(np.minimum(self.cost, 0.0).sum())
        self.trail: list[int] = []

    def _fix(self, j: int, v: int) -> None:
        self.values[j] = v
        self.trail.append(j)
        for i, a in zip(self.col_rows[j], self.col_coefs[j]):
            self.fixed_act[i] += a * v
            if a > 0:
                self.pos_rem[i] -= a
                self.pos_free_cnt[i] -= 1
            else:
                self.neg_rem[i] -= a
        cj = self.cost[j]
        self.fixed_cost += cj * v
        if cj < 0:
            self.neg_cost_rem -= cj

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            j = self.trail.pop()
            v = self.values[j]
            self.values[j] = -1
            for i, a in zip(self.col_rows[j], self.col_coefs[j]):
                self.fixed_act[i] -= a * v
                if a > 0:
                    self.pos_rem[i] += a
                    self.pos_free_cnt[i] += 1
                else:
                    self.neg_rem[i] += a
            cj = self.cost[j]
            self.fixed_cost -= cj * v
            if cj < 0:
                self.neg_cost_rem += cj

    def infeasible_here(self) -> bool:
        min_act = self.fixed_act + self.neg_rem
        max_act = self.fixed_act + self.pos_rem
        if np.any(self.is_leq & (min_act > self.rhs + FEAS_TOL)):
            return True
        if np.any(self.is_geq & (max_act < self.rhs - FEAS_TOL)):
            return True
        return False

    def propagate(self) -> bool:
        """Fix forced variables until fixpoint; False on a contradiction."""
        while True:
            if self.infeasible_here():
                return False
            forcing = self.geq_rows[
                (self.pos_free_cnt[self.geq_rows] == 1)
                & (self.fixed_act[self.geq_rows] < self.rhs[self.geq_rows] - FEAS_TOL)
            ]
            if forcing.size == 0:
                return True
            progressed = False
            for i in forcing:
                if self.pos_free_cnt[i] != 1:
                    continue  # an earlier fix in this pass already handled it
                if self.fixed_act[i] >= self.rhs[i] - FEAS_TOL:
                    continue
                idx = self.row_idx[i]
                coef = self.row_coef[i]
                free_pos = idx[(coef > 0) & (self.values[idx] == -1)]
                self._fix(int(free_pos[0]), 1)
                progressed = True
            if not progressed:
                return True

    def lower_bound(self) -> float:
        return self.fixed_cost + self.neg_cost_rem


def solve(
    instance: MipInstance,
    fixed: dict[int, int] | None = None,
    node_limit: int | None = None,
    time_limit: float | None = None,
    warm_start=None,
    first_feasible: bool = False,
) -> SolveResult:
    """Depth-first exact search over the free variables.

    `fixed` pins a partial assignment; `warm_start` installs an initial
    incumbent used for pruning only (must be feasible and respect `fixed`);
    `first_feasible` stops at the first incumbent found by the tree search.
    Status is "optimal" only when the tree was exhausted within the limits.
    """
    if node_limit is not None and node_limit <= 0:
        raise ValueError("node_limit must be positive")
    if time_limit is not None and time_limit <= 0:
        raise ValueError("time_limit must be positive")

    s = _Search(instance)
    n = instance.n_vars

    if fixed:
        for j, v in fixed.items():
            if not 0 <= j < n:
                raise ValueError(f"fixed variable {j} out of range")
            if v not in (0, 1):
                raise ValueError("fixed values must be 0 or 1")
            s._fix(int(j), int(v))

    incumbent: np.ndarray | None = None
    incumbent_val = float("inf")
    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=np.int8)
        if ws.shape != (n,):
            raise ValueError("warm start length mismatch")
        from .model import check_feasible

        ok, row = check_feasible(instance, ws)
        if not ok:
            raise ValueError(f"warm start violates constraint {row}")
        if fixed and any(ws[j] != v for j, v in fixed.items()):
            raise ValueError("warm start contradicts the fixed partial assignment")
        incumbent = ws.copy()
        incumbent_val = objective_value(instance, ws)

    start = time.perf_counter()
    nodes = 0
    limit_hit = False
    stop = False

    def dfs(order_pos: int) -> None:
        nonlocal nodes, incumbent, incumbent_val, limit_hit, stop
        if stop or limit_hit:
            return
        if node_limit is not None and nodes >= node_limit:
            limit_hit = True
            return
        if time_limit is not None and time.perf_counter() - start >= time_limit:
            limit_hit = True
            return
        nodes += 1
        mark = len(s.trail)
        if not s.propagate():
            s.undo_to(mark)
            return
        if s.lower_bound() >= incumbent_val:
            s.undo_to(mark)
            return
        pos = order_pos
        while pos < n and s.values[s.order[pos]] != -1:
            pos += 1
        if pos == n:
            # complete assignment; propagate() already verified feasibility
            val = s.fixed_cost
            if val < incumbent_val:
                incumbent = s.values.copy()
                incumbent_val = val
                if first_feasible:
                    stop = True
            s.undo_to(mark)
            return
        j = int(s.order[pos])
        first_val = 1 if s.cost[j] < 0 else 0
        for v in (first_val, 1 - first_val):
            child_mark = len(s.trail)
            s._fix(j, v)
            dfs(pos + 1)
            s.undo_to(child_mark)
            if stop or limit_hit:
                break
        s.undo_to(mark)

    root_feasible = True
    mark0 = len(s.trail)
    if s.infeasible_here():
        root_feasible = False
        s.undo_to(mark0)
    if root_feasible:
        dfs(0)

    if incumbent is not None:
        best = tuple(int(v) for v in incumbent)
        status = "feasible_limit_hit" if (limit_hit or stop) else "optimal"
        return SolveResult(
            status=status, best=best, best_value=float(incumbent_val), nodes_explored=nodes
        )
    if limit_hit:
        return SolveResult(status="feasible_limit_hit", best=None, best_value=None, nodes_explored=nodes)
    return SolveResult(status="infeasible", best=None, best_value=None, nodes_explored=nodes)


def lb_step(
    instance: MipInstance,
    x_ref,
    k: int,
    node_limit: int | None = None,
    time_limit: float | None = None,
) -> SolveResult:
    """Best solution within Hamming distance k of x_ref, warm-started there.

    Never returns anything worse than x_ref since x_ref is in the ball."""
    bounded = add_local_branching_constraint(instance, x_ref, k)
    res = solve(
        bounded,
        node_limit=node_limit,
        time_limit=time_limit,
        warm_start=x_ref,
    )
    return res
