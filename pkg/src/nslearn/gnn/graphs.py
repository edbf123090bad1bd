"""Graph containers fed to the policy networks, plus dataset (de)serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = ["FeatureGraph", "BipartiteGraph", "LabeledSample", "load_jsonl", "dump_jsonl"]


@dataclass
class FeatureGraph:
    """General graph state: per-item predictions are made for candidate edges."""

    node_features: np.ndarray          # (n, d)
    edges: np.ndarray                  # (m, 2) int endpoints
    edge_features: np.ndarray          # (m, de)
    directed: bool = False
    candidates: np.ndarray | None = None  # indices into edges; None = all edges

    def __post_init__(self):
        self.node_features = np.asarray(self.node_features, dtype=np.float64)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.edge_features = np.asarray(self.edge_features, dtype=np.float64)
        if self.edge_features.shape[0] != self.edges.shape[0]:
            raise ValueError("edge feature count does not match edge count")
        n = self.node_features.shape[0]
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        if self.candidates is None:
            self.candidates = np.arange(self.edges.shape[0], dtype=np.int64)
        else:
            self.candidates = np.asarray(self.candidates, dtype=np.int64)
            if self.candidates.size and (
                self.candidates.min() < 0 or self.candidates.max() >= self.edges.shape[0]
            ):
                raise ValueError("candidate index out of range")

    @property
    def n_items(self) -> int:
        return int(self.candidates.shape[0])


@dataclass
class BipartiteGraph:
    """Variable/constraint bipartite state of a MIP; predictions per variable."""

    var_features: np.ndarray   # (n, dv)
    cons_features: np.ndarray  # (m, dc)
    edges: np.ndarray          # (k, 2) int: (variable, constraint)
    edge_features: np.ndarray  # (k, de)

    def __post_init__(self):
        self.var_features = np.asarray(self.var_features, dtype=np.float64)
        self.cons_features = np.asarray(self.cons_features, dtype=np.float64)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.edge_features = np.asarray(self.edge_features, dtype=np.float64)
        if self.edge_features.shape[0] != self.edges.shape[0]:
            raise ValueError("edge feature count does not match edge count")
        if self.edges.size:
            if self.edges[:, 0].min() < 0 or self.edges[:, 0].max() >= self.var_features.shape[0]:
                raise ValueError("variable endpoint out of range")
            if self.edges[:, 1].min() < 0 or self.edges[:, 1].max() >= self.cons_features.shape[0]:
                raise ValueError("constraint endpoint out of range")

    @property
    def n_items(self) -> int:
        return int(self.var_features.shape[0])


State = Union[FeatureGraph, BipartiteGraph]


@dataclass
class LabeledSample:
    """One training sample: a state and the 0/1 label per candidate item."""

    state: State
    label: np.ndarray
    source: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.label = np.asarray(self.label, dtype=np.int64)
        if self.label.shape != (self.state.n_items,):
            raise ValueError(
                f"label length {self.label.shape} does not match item count {self.state.n_items}"
            )
        if self.label.size and not np.isin(self.label, (0, 1)).all():
            raise ValueError("labels must be 0/1")

    def to_json_line(self) -> str:
        s = self.state
        if isinstance(s, FeatureGraph):
            payload = {
                "kind": "graph",
                "node_features": s.node_features.tolist(),
                "edges": s.edges.tolist(),
                "edge_features": s.edge_features.tolist(),
                "directed": s.directed,
                "candidates": s.candidates.tolist(),
            }
        else:
            payload = {
                "kind": "bipartite",
                "var_features": s.var_features.tolist(),
                "cons_features": s.cons_features.tolist(),
                "edges": s.edges.tolist(),
                "edge_features": s.edge_features.tolist(),
            }
        payload["label"] = self.label.tolist()
        payload["source"] = self.source
        payload["meta"] = self.meta
        return json.dumps(payload)

    @classmethod
    def from_json_line(cls, line: str) -> "LabeledSample":
        d = json.loads(line)
        if d["kind"] == "graph":
            state: State = FeatureGraph(
                node_features=d["node_features"],
                edges=d["edges"],
                edge_features=d["edge_features"],
                directed=bool(d.get("directed", False)),
                candidates=d["candidates"],
            )
        elif d["kind"] == "bipartite":
            state = BipartiteGraph(
                var_features=d["var_features"],
                cons_features=d["cons_features"],
                edges=d["edges"],
                edge_features=d["edge_features"],
            )
        else:
            raise ValueError(f"unknown sample kind {d['kind']!r}")
        return cls(state=state, label=d["label"], source=d.get("source", ""), meta=d.get("meta", {}))


def dump_jsonl(samples: list[LabeledSample], path) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(s.to_json_line())
            fh.write("\n")


def load_jsonl(path) -> list[LabeledSample]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(LabeledSample.from_json_line(line))
    return out
