"""Binary MIP data model: instances, feasibility, Hamming-ball machinery."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..gnn.graphs import BipartiteGraph

__all__ = [
    "Constraint",
    "MipInstance",
    "check_feasible",
    "objective_value",
    "hamming_distance",
    "add_local_branching_constraint",
    "to_bipartite_graph",
    "FEAS_TOL",
]

FEAS_TOL = 1e-9
RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class Constraint:
    idx: tuple[int, ...]
    coef: tuple[float, ...]
    rel: str
    rhs: float

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        if len(self.idx) != len(self.coef):
            raise ValueError("idx and coef lengths differ")
        if len(set(self.idx)) != len(self.idx):
            raise ValueError("duplicate variable index within a constraint")


@dataclass(frozen=True)
class MipInstance:
    n_vars: int
    objective: tuple[float, ...]
    constraints: tuple[Constraint, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.objective) != self.n_vars:
            raise ValueError("objective length does not match n_vars")
        for c in self.constraints:
            if c.idx and (min(c.idx) < 0 or max(c.idx) >= self.n_vars):
                raise ValueError("constraint references a variable out of range")

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "n_vars": self.n_vars,
                "objective": list(self.objective),
                "constraints": [
                    {"idx": list(c.idx), "coef": list(c.coef), "rel": c.rel, "rhs": c.rhs}
                    for c in self.constraints
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MipInstance":
        d = json.loads(text)
        return cls(
            n_vars=int(d["n_vars"]),
            objective=tuple(float(x) for x in d["objective"]),
            constraints=tuple(
                Constraint(
                    idx=tuple(int(i) for i in c["idx"]),
                    coef=tuple(float(a) for a in c["coef"]),
                    rel=c["rel"],
                    rhs=float(c["rhs"]),
                )
                for c in d["constraints"]
            ),
            name=d.get("name", ""),
        )


def _check_lengths(instance: MipInstance, assignment) -> np.ndarray:
    x = np.asarray(assignment, dtype=float)
    if x.shape != (instance.n_vars,):
        raise ValueError(f"assignment length {x.shape} does not match n_vars {instance.n_vars}")
    return x


def check_feasible(instance: MipInstance, assignment) -> tuple[bool, int | None]:
    """All constraints within absolute tolerance 1e-9; returns the first
    violated constraint id when infeasible."""
    x = _check_lengths(instance, assignment)
    for i, c in enumerate(instance.constraints):
        act = sum(a * x[j] for j, a in zip(c.idx, c.coef))
        if c.rel == "<=" and act > c.rhs + FEAS_TOL:
            return False, i
        if c.rel == ">=" and act < c.rhs - FEAS_TOL:
            return False, i
        if c.rel == "=" and abs(act - c.rhs) > FEAS_TOL:
            return False, i
    return True, None


def objective_value(instance: MipInstance, assignment) -> float:
    x = _check_lengths(instance, assignment)
    return float(np.dot(instance.objective, x))


def hamming_distance(x, x_ref, restricted_to=None) -> int:
    """Count of differing positions, optionally within an index set."""
    a = np.asarray(x)
    b = np.asarray(x_ref)
    if a.shape != b.shape:
        raise ValueError("assignments must have equal length")
    if restricted_to is None:
        return int((a != b).sum())
    idx = sorted(set(restricted_to))
    return int(sum(1 for j in idx if a[j] != b[j]))


def add_local_branching_constraint(instance: MipInstance, x_ref, k: int) -> MipInstance:
    """Append the radius-k Hamming-ball row around x_ref, linearized as
    sum_{x_ref_j = 0} x_j - sum_{x_ref_j = 1} x_j <= k - |ones(x_ref)|."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = _check_lengths(instance, x_ref)
    idx = tuple(range(instance.n_vars))
    coef = tuple(1.0 if x[j] == 0 else -1.0 for j in idx)
    ones = int(x.sum())
    row = Constraint(idx=idx, coef=coef, rel="<=", rhs=float(k - ones))
    return MipInstance(
        n_vars=instance.n_vars,
        objective=instance.objective,
        constraints=instance.constraints + (row,),
        name=instance.name,
    )


def to_bipartite_graph(instance: MipInstance, assignment) -> BipartiteGraph:
    """State encoding for the destroy policy: variable nodes carry the
    incumbent value, constraint nodes carry the right-hand side, edges carry
    the coefficient."""
    x = _check_lengths(instance, assignment)
    var_features = x.reshape(-1, 1)
    cons_features = np.array([[c.rhs] for c in instance.constraints], dtype=float).reshape(
        len(instance.constraints), 1
    )
    edges = []
    feats = []
    for i, c in enumerate(instance.constraints):
        for j, a in zip(c.idx, c.coef):
            edges.append((j, i))
            feats.append((a,))
    return BipartiteGraph(
        var_features=var_features,
        cons_features=cons_features,
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_features=np.array(feats, dtype=float).reshape(-1, 1),
    )
