"""Message-passing policy networks over the two state encodings.

One convolution step updates node states with
    v_i <- f_psi(v_i, sum_{j in N(i)} g_phi(v_i, v_j, e_ji)),
where f_psi and g_phi are one-hidden-layer perceptrons with rectified-linear
activation and the aggregation is a plain sum. The generic-graph variant
reads out two logits per candidate edge from the endpoint-sum of embeddings
plus the edge features; the bipartite variant alternates variable-to-
constraint and constraint-to-variable half-steps and reads out two logits
per variable. Forward passes cache activations so gradients can be
accumulated analytically; everything is float64 numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .graphs import BipartiteGraph, FeatureGraph
from .params import ParamSpec

__all__ = [
    "GraphArch",
    "BipartiteArch",
    "PolicyModel",
    "init_model",
    "graph_forward",
    "bipartite_forward",
    "forward_probs",
    "forward_backward",
    "message_passing_layer",
    "softmax2",
]

HIDDEN_DEFAULT = 32
LAYERS_DEFAULT = 2


@dataclass(frozen=True)
class GraphArch:
    node_dim: int
    edge_dim: int
    hidden: int = HIDDEN_DEFAULT
    layers: int = LAYERS_DEFAULT
    variant: str = field(default="graph", init=False)


@dataclass(frozen=True)
class BipartiteArch:
    var_dim: int
    cons_dim: int
    edge_dim: int
    hidden: int = HIDDEN_DEFAULT
    layers: int = LAYERS_DEFAULT
    variant: str = field(default="bipartite", init=False)


Arch = Union[GraphArch, BipartiteArch]


def _mlp_entries(prefix: str, d_in: int, d_hidden: int, d_out: int):
    return [
        (f"{prefix}.w1", (d_hidden, d_in)),
        (f"{prefix}.b1", (d_hidden,)),
        (f"{prefix}.w2", (d_out, d_hidden)),
        (f"{prefix}.b2", (d_out,)),
    ]


def build_param_spec(arch: Arch) -> ParamSpec:
    h = arch.hidden
    entries: list[tuple[str, tuple[int, ...]]] = []
    if isinstance(arch, GraphArch):
        entries += [("embed.node.w", (h, arch.node_dim)), ("embed.node.b", (h,))]
        for l in range(1, arch.layers + 1):
            entries += _mlp_entries(f"conv{l}.msg", 2 * h + arch.edge_dim, h, h)
            entries += _mlp_entries(f"conv{l}.upd", 2 * h, h, h)
        entries += _mlp_entries("head", h + arch.edge_dim, h, 2)
    elif isinstance(arch, BipartiteArch):
        entries += [("embed.var.w", (h, arch.var_dim)), ("embed.var.b", (h,))]
        entries += [("embed.cons.w", (h, arch.cons_dim)), ("embed.cons.b", (h,))]
        for l in range(1, arch.layers + 1):
            for half in ("vc", "cv"):
                entries += _mlp_entries(f"conv{l}.{half}.msg", 2 * h + arch.edge_dim, h, h)
                entries += _mlp_entries(f"conv{l}.{half}.upd", 2 * h, h, h)
        entries += _mlp_entries("head", h, h, 2)
    else:
        raise TypeError(f"unknown architecture {arch!r}")
    return ParamSpec(entries)


class FeatureStats:
    """Per-feature z-score statistics, applied before the input embedding."""

    def __init__(self, stats: dict[str, tuple[np.ndarray, np.ndarray]] | None = None):
        self.stats = stats or {}

    @staticmethod
    def identity() -> "FeatureStats":
        return FeatureStats({})

    def apply(self, family: str, x: np.ndarray) -> np.ndarray:
        if family not in self.stats:
            return x
        mean, std = self.stats[family]
        return (x - mean) / std

    def to_dict(self) -> dict:
        return {k: {"mean": m.tolist(), "std": s.tolist()} for k, (m, s) in self.stats.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureStats":
        return cls(
            {
                k: (np.asarray(v["mean"], dtype=float), np.asarray(v["std"], dtype=float))
                for k, v in d.items()
            }
        )

    @classmethod
    def fit(cls, family_rows: dict[str, list[np.ndarray]]) -> "FeatureStats":
        stats = {}
        for family, rows in family_rows.items():
            data = np.concatenate([r for r in rows if r.size], axis=0) if rows else None
            if data is None or data.size == 0:
                continue
            mean = data.mean(axis=0)
            std = data.std(axis=0)
            std[std < 1e-8] = 1.0
            stats[family] = (mean, std)
        return cls(stats)


@dataclass
class PolicyModel:
    arch: Arch
    theta: np.ndarray
    stats: FeatureStats = field(default_factory=FeatureStats.identity)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.spec = build_param_spec(self.arch)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (self.spec.total,):
            raise ValueError(
                f"parameter count {self.theta.size} does not match descriptor ({self.spec.total})"
            )

    @property
    def variant(self) -> str:
        return self.arch.variant


def init_model(arch: Arch, seed: int, stats: FeatureStats | None = None) -> PolicyModel:
    """Glorot-style normal init for weights, zero biases; deterministic in seed."""
    spec = build_param_spec(arch)
    theta = spec.zeros()
    rng = np.random.default_rng(seed)
    for name, shape in spec.entries:
        if name.endswith(".w") or name.endswith(".w1") or name.endswith(".w2"):
            fan_out, fan_in = shape
            scale = np.sqrt(2.0 / (fan_in + fan_out))
            spec.view(theta, name)[:] = rng.normal(0.0, scale, size=shape)
    model = PolicyModel(arch=arch, theta=theta, stats=stats or FeatureStats.identity())
    model.meta["seed"] = seed
    return model


# ---------------------------------------------------------------------------
# dense blocks


def _mlp_forward(theta, spec, prefix, x):
    w1 = spec.view(theta, f"{prefix}.w1")
    b1 = spec.view(theta, f"{prefix}.b1")
    w2 = spec.view(theta, f"{prefix}.w2")
    b2 = spec.view(theta, f"{prefix}.b2")
    z1 = x @ w1.T + b1
    h1 = np.maximum(z1, 0.0)
    y = h1 @ w2.T + b2
    return y, (x, h1, z1 > 0.0)


def _mlp_backward(theta, spec, prefix, dy, cache, grad):
    x, h1, mask = cache
    w1 = spec.view(theta, f"{prefix}.w1")
    w2 = spec.view(theta, f"{prefix}.w2")
    spec.view(grad, f"{prefix}.w2")[:] += dy.T @ h1
    spec.view(grad, f"{prefix}.b2")[:] += dy.sum(axis=0)
    dh1 = dy @ w2
    dz1 = dh1 * mask
    spec.view(grad, f"{prefix}.w1")[:] += dz1.T @ x
    spec.view(grad, f"{prefix}.b1")[:] += dz1.sum(axis=0)
    return dz1 @ w1


def _embed_forward(theta, spec, prefix, x):
    w = spec.view(theta, f"{prefix}.w")
    b = spec.view(theta, f"{prefix}.b")
    return x @ w.T + b


def _embed_backward(theta, spec, prefix, dy, x, grad):
    spec.view(grad, f"{prefix}.w")[:] += dy.T @ x
    spec.view(grad, f"{prefix}.b")[:] += dy.sum(axis=0)


def softmax2(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _onehot_scatter(idx: np.ndarray, n: int) -> np.ndarray:
    """Dense (n, len(idx)) indicator used to sum per-arc rows into nodes;
    a matmul against it is much faster than np.add.at at these sizes."""
    a = np.zeros((n, idx.size))
    a[idx, np.arange(idx.size)] = 1.0
    return a


def message_passing_layer(
    node_states: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    edge_features: np.ndarray,
    theta: np.ndarray,
    spec: ParamSpec,
    prefix: str,
    scatter: tuple[np.ndarray, np.ndarray] | None = None,
):
    """One convolution step; messages flow src -> dst along the given arcs.

    Isolated nodes aggregate the zero vector (empty-sum convention). Returns
    the updated states plus the caches needed for the backward pass.
    """
    n = node_states.shape[0]
    h = node_states.shape[1]
    if src.size:
        if scatter is None:
            scatter = (_onehot_scatter(dst, n), _onehot_scatter(src, n))
        msg_in = np.concatenate(
            [node_states[dst], node_states[src], edge_features], axis=1
        )
        msgs, msg_cache = _mlp_forward(theta, spec, f"{prefix}.msg", msg_in)
        agg = scatter[0] @ msgs
    else:
        msg_cache = None
        agg = np.zeros((n, h))
    upd_in = np.concatenate([node_states, agg], axis=1)
    out, upd_cache = _mlp_forward(theta, spec, f"{prefix}.upd", upd_in)
    return out, (msg_cache, upd_cache, scatter, src, dst, n, h)


def _message_passing_backward(dout, layer_cache, theta, spec, prefix, grad):
    msg_cache, upd_cache, scatter, src, dst, n, h = layer_cache
    dupd_in = _mlp_backward(theta, spec, f"{prefix}.upd", dout, upd_cache, grad)
    dnode = dupd_in[:, :h].copy()
    dagg = dupd_in[:, h:]
    if msg_cache is not None:
        dmsgs = dagg[dst]
        dmsg_in = _mlp_backward(theta, spec, f"{prefix}.msg", dmsgs, msg_cache, grad)
        dnode += scatter[0] @ dmsg_in[:, :h]
        dnode += scatter[1] @ dmsg_in[:, h : 2 * h]
    return dnode


# ---------------------------------------------------------------------------
# generic graph variant


def _graph_forward_cached(model: PolicyModel, graph: FeatureGraph):
    arch, theta, spec = model.arch, model.theta, model.spec
    if not isinstance(arch, GraphArch):
        raise ValueError("model variant is not 'graph'")
    if graph.node_features.shape[1] != arch.node_dim:
        raise ValueError("node feature dimension does not match the architecture")
    if graph.edge_features.shape[1] != arch.edge_dim:
        raise ValueError("edge feature dimension does not match the architecture")

    x = model.stats.apply("node", graph.node_features)
    e = model.stats.apply("edge", graph.edge_features)
    if graph.directed:
        src, dst, e_arc = graph.edges[:, 0], graph.edges[:, 1], e
    else:
        src = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
        dst = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
        e_arc = np.concatenate([e, e], axis=0)
    n = x.shape[0]
    scatter = (_onehot_scatter(dst, n), _onehot_scatter(src, n)) if src.size else None
    states = _embed_forward(theta, spec, "embed.node", x)
    layer_caches = []
    for l in range(1, arch.layers + 1):
        states, cache = message_passing_layer(
            states, src, dst, e_arc, theta, spec, f"conv{l}", scatter=scatter
        )
        layer_caches.append(cache)
    cand = graph.candidates
    u, v = graph.edges[cand, 0], graph.edges[cand, 1]
    head_in = np.concatenate([states[u] + states[v], e[cand]], axis=1)
    logits, head_cache = _mlp_forward(theta, spec, "head", head_in)
    fwd = {
        "x": x,
        "src": src,
        "dst": dst,
        "u": u,
        "v": v,
        "n": x.shape[0],
        "h": arch.hidden,
        "layer_caches": layer_caches,
        "head_cache": head_cache,
    }
    return logits, fwd


def _graph_backward(model: PolicyModel, fwd, dlogits) -> np.ndarray:
    arch, theta, spec = model.arch, model.theta, model.spec
    grad = spec.zeros()
    dhead_in = _mlp_backward(theta, spec, "head", dlogits, fwd["head_cache"], grad)
    h = fwd["h"]
    dstates = np.zeros((fwd["n"], h))
    dsum = dhead_in[:, :h]
    np.add.at(dstates, fwd["u"], dsum)
    np.add.at(dstates, fwd["v"], dsum)
    for l in range(arch.layers, 0, -1):
        dstates = _message_passing_backward(
            dstates, fwd["layer_caches"][l - 1], theta, spec, f"conv{l}", grad
        )
    _embed_backward(theta, spec, "embed.node", dstates, fwd["x"], grad)
    return grad


def graph_forward(model: PolicyModel, graph: FeatureGraph) -> np.ndarray:
    """Per-candidate-edge probability pairs (columns: not-improving, improving)."""
    logits, _ = _graph_forward_cached(model, graph)
    return softmax2(logits)


# ---------------------------------------------------------------------------
# bipartite variant


def _bipartite_forward_cached(model: PolicyModel, graph: BipartiteGraph):
    arch, theta, spec = model.arch, model.theta, model.spec
    if not isinstance(arch, BipartiteArch):
        raise ValueError("model variant is not 'bipartite'")
    if graph.var_features.shape[1] != arch.var_dim:
        raise ValueError("variable feature dimension does not match the architecture")
    if graph.cons_features.shape[1] != arch.cons_dim:
        raise ValueError("constraint feature dimension does not match the architecture")
    if graph.edge_features.shape[1] != arch.edge_dim:
        raise ValueError("edge feature dimension does not match the architecture")

    xv = model.stats.apply("var", graph.var_features)
    xc = model.stats.apply("cons", graph.cons_features)
    e = model.stats.apply("edge", graph.edge_features)
    vi, cj = graph.edges[:, 0], graph.edges[:, 1]

    v_states = _embed_forward(theta, spec, "embed.var", xv)
    c_states = _embed_forward(theta, spec, "embed.cons", xc)
    if vi.size:
        scatter_c = _onehot_scatter(cj, xc.shape[0])
        scatter_v = _onehot_scatter(vi, xv.shape[0])
    else:
        scatter_c = scatter_v = None
    layer_caches = []
    for l in range(1, arch.layers + 1):
        c_states, vc_cache = _half_layer(
            c_states, v_states, vi, cj, e, theta, spec, f"conv{l}.vc", scatter_c, scatter_v
        )
        v_states, cv_cache = _half_layer(
            v_states, c_states, cj, vi, e, theta, spec, f"conv{l}.cv", scatter_v, scatter_c
        )
        layer_caches.append((vc_cache, cv_cache))
    logits, head_cache = _mlp_forward(theta, spec, "head", v_states)
    fwd = {
        "xv": xv,
        "xc": xc,
        "vi": vi,
        "cj": cj,
        "nv": xv.shape[0],
        "nc": xc.shape[0],
        "h": arch.hidden,
        "layer_caches": layer_caches,
        "head_cache": head_cache,
    }
    return logits, fwd


def _half_layer(
    receivers, senders, sender_idx, receiver_idx, e, theta, spec, prefix,
    rec_scatter=None, send_scatter=None,
):
    """Message-passing step across one side of the bipartite graph."""
    n, h = receivers.shape
    if sender_idx.size:
        msg_in = np.concatenate(
            [receivers[receiver_idx], senders[sender_idx], e], axis=1
        )
        msgs, msg_cache = _mlp_forward(theta, spec, f"{prefix}.msg", msg_in)
        if rec_scatter is None:
            rec_scatter = _onehot_scatter(receiver_idx, n)
        agg = rec_scatter @ msgs
    else:
        msg_cache = None
        agg = np.zeros((n, h))
    upd_in = np.concatenate([receivers, agg], axis=1)
    out, upd_cache = _mlp_forward(theta, spec, f"{prefix}.upd", upd_in)
    return out, (
        msg_cache, upd_cache, sender_idx, receiver_idx, n, h, senders.shape[0],
        rec_scatter, send_scatter,
    )


def _half_layer_backward(dout, cache, theta, spec, prefix, grad):
    (msg_cache, upd_cache, sender_idx, receiver_idx, n, h, n_senders,
     rec_scatter, send_scatter) = cache
    dupd_in = _mlp_backward(theta, spec, f"{prefix}.upd", dout, upd_cache, grad)
    drec = dupd_in[:, :h].copy()
    dagg = dupd_in[:, h:]
    dsend = np.zeros((n_senders, h))
    if msg_cache is not None:
        dmsgs = dagg[receiver_idx]
        dmsg_in = _mlp_backward(theta, spec, f"{prefix}.msg", dmsgs, msg_cache, grad)
        drec += rec_scatter @ dmsg_in[:, :h]
        if send_scatter is None:
            send_scatter = _onehot_scatter(sender_idx, n_senders)
        dsend += send_scatter @ dmsg_in[:, h : 2 * h]
    return drec, dsend


def _bipartite_backward(model: PolicyModel, fwd, dlogits) -> np.ndarray:
    arch, theta, spec = model.arch, model.theta, model.spec
    grad = spec.zeros()
    dv = _mlp_backward(theta, spec, "head", dlogits, fwd["head_cache"], grad)
    dc = np.zeros((fwd["nc"], fwd["h"]))
    for l in range(arch.layers, 0, -1):
        vc_cache, cv_cache = fwd["layer_caches"][l - 1]
        dv, dc_from_cv = _half_layer_backward(dv, cv_cache, theta, spec, f"conv{l}.cv", grad)
        dc = dc + dc_from_cv
        dc, dv_from_vc = _half_layer_backward(dc, vc_cache, theta, spec, f"conv{l}.vc", grad)
        dv = dv + dv_from_vc
    _embed_backward(theta, spec, "embed.var", dv, fwd["xv"], grad)
    _embed_backward(theta, spec, "embed.cons", dc, fwd["xc"], grad)
    return grad


def bipartite_forward(model: PolicyModel, graph: BipartiteGraph) -> np.ndarray:
    """Per-variable probability pairs (columns: keep, destroy)."""
    logits, _ = _bipartite_forward_cached(model, graph)
    return softmax2(logits)


# ---------------------------------------------------------------------------
# unified entry points


def forward_probs(model: PolicyModel, state) -> np.ndarray:
    if isinstance(state, FeatureGraph):
        return graph_forward(model, state)
    if isinstance(state, BipartiteGraph):
        return bipartite_forward(model, state)
    raise TypeError(f"unsupported state {type(state)!r}")


def forward_backward(model: PolicyModel, state, dlogits_fn):
    """Run forward, obtain dL/dlogits from the callback, return (probs, loss, grad)."""
    if isinstance(state, FeatureGraph):
        logits, fwd = _graph_forward_cached(model, state)
        probs = softmax2(logits)
        loss, dlogits = dlogits_fn(probs)
        grad = _graph_backward(model, fwd, dlogits)
    elif isinstance(state, BipartiteGraph):
        logits, fwd = _bipartite_forward_cached(model, state)
        probs = softmax2(logits)
        loss, dlogits = dlogits_fn(probs)
        grad = _bipartite_backward(model, fwd, dlogits)
    else:
        raise TypeError(f"unsupported state {type(state)!r}")
    return probs, loss, grad
