"""Topology scoring: direct throughput, congestion, and the two objectives.

The fast score fbar maximizes, over all root choices, the worst directed
edge's mixed effective throughput while ignoring channel interference. The
final score f starts from fbar's best root, assigns the three channels
greedily in decreasing scenario-C congestion order, and divides each edge's
throughput by one plus its same-channel incident edges.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .instance import WnoInstance
from .topology import Edge, Topology, normalize_edge

__all__ = [
    "NetworkConfig",
    "EdgeThroughput",
    "ThroughputReport",
    "direct_throughput",
    "congestion",
    "approx_objective",
    "full_objective",
    "throughput_report",
]

TP_CAP_MBPS = 100.0
TP_FLOOR_FRACTION = 0.01
N_CHANNELS = 3
SCENARIOS = ("A", "B", "C")


@dataclass(frozen=True)
class NetworkConfig:
    """Root choice plus per-edge channel/waveform/beam-count assignments."""

    root: int
    channel: dict[Edge, int]
    waveform: dict[Edge, int]
    n_beams: dict[Edge, int]


@dataclass(frozen=True)
class EdgeThroughput:
    parent: int
    child: int
    tp: float
    n_a: int
    n_b: int
    n_c: int
    eff_a: float
    eff_b: float
    eff_c: float
    eff_mixed: float


@dataclass(frozen=True)
class ThroughputReport:
    root: int
    entries: dict[Edge, EdgeThroughput]


def direct_throughput(path_loss_db: float, fade_margin_db: float) -> float:
    """Surrogate link speed in Mbps: linear ramp from 80 to 160 dB total loss,
    capped at 100 Mbps with a 1% floor; monotone nonincreasing in both inputs."""
    frac = (160.0 - (path_loss_db + fade_margin_db)) / 80.0
    frac = min(1.0, max(TP_FLOOR_FRACTION, frac))
    return TP_CAP_MBPS * frac


def congestion(scenario: str, desc_counts: list[int], n: int) -> dict[int, int]:
    """Traffic multiplicity per directed tree edge, keyed by child endpoint.

    Scenario A is a single communication (multiplicity 1 everywhere);
    B routes every node to the root (|desc| senders cross the edge); C is
    all-to-all (|desc| * (n - |desc|) crossing pairs).
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    out = {}
    for v, d in enumerate(desc_counts):
        if d == n:  # the root has no incoming edge
            continue
        if scenario == "A":
            out[v] = 1
        elif scenario == "B":
            out[v] = d
        else:
            out[v] = d * (n - d)
    return out


_tp_cache: "weakref.WeakKeyDictionary[WnoInstance, list[list[float]]]" = (
    weakref.WeakKeyDictionary()
)


def _tp_matrix(instance: WnoInstance) -> list[list[float]]:
    tp = _tp_cache.get(instance)
    if tp is None:
        total = instance.path_loss + instance.fade_margin
        frac = np.clip((160.0 - total) / 80.0, TP_FLOOR_FRACTION, 1.0)
        tp = (TP_CAP_MBPS * frac).tolist()
        _tp_cache[instance] = tp
    return tp


def _orient(adj: list[list[int]], n: int, root: int):
    """BFS orientation: (visit order, parent array, subtree sizes)."""
    parent = [-1] * n
    parent[root] = root
    order = [root]
    for u in order:
        for w in adj[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
    desc = [1] * n
    for u in reversed(order):
        if u != root:
            desc[parent[u]] += desc[u]
    return order, parent, desc


def _worst_mixed(tp, adj, n: int, root: int) -> float:
    order, parent, desc = _orient(adj, n, root)
    worst = float("inf")
    for v in order[1:]:
        u = parent[v]
        t = tp[u][v]
        d = desc[v]
        mixed = (t + t / d + t / (d * (n - d))) / 3.0
        if mixed < worst:
            worst = mixed
    return worst


def _config_for_root(topology: Topology, root: int, channels: dict[Edge, int] | None = None):
    n = topology.n
    adj = topology.adjacency()
    _, parent, _ = _orient(adj, n, root)
    children = [0] * n
    for v in range(n):
        if v != root:
            children[parent[v]] += 1
    waveform = {}
    n_beams = {}
    for e in topology.edges:
        u, v = e
        par = u if parent[v] == u else v
        waveform[e] = 1 if children[par] >= 2 else 0
        n_beams[e] = children[par]
    channel = channels if channels is not None else {e: 0 for e in topology.edges}
    return NetworkConfig(root=root, channel=channel, waveform=waveform, n_beams=n_beams)


def approx_objective(instance: WnoInstance, topology: Topology) -> tuple[float, NetworkConfig]:
    """fbar: best over roots of the weakest mixed effective throughput,
    interference-free. Ties between roots break to the lowest node id."""
    n = topology.n
    tp = _tp_matrix(instance)
    adj = topology.adjacency()
    best_root = 0
    best = -float("inf")
    for r in range(n):
        val = _worst_mixed(tp, adj, n, r)
        if val > best:
            best, best_root = val, r
    return best, _config_for_root(topology, best_root)


def approx_objective_value(instance: WnoInstance, topology: Topology) -> float:
    """fbar without building the configuration (hot path in search loops)."""
    return approx_value_from_edges(instance, topology.edges, topology.n)


def approx_value_from_edges(instance: WnoInstance, edges, n: int) -> float:
    """fbar from a raw edge list the caller guarantees to be a spanning tree
    (skips Topology validation; used when scoring many edge-swap candidates)."""
    tp = _tp_matrix(instance)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    best = -float("inf")
    for r in range(n):
        val = _worst_mixed(tp, adj, n, r)
        if val > best:
            best = val
    return best


def throughput_report(instance: WnoInstance, topology: Topology, root: int) -> ThroughputReport:
    n = topology.n
    tp = _tp_matrix(instance)
    adj = topology.adjacency()
    order, parent, desc = _orient(adj, n, root)
    entries = {}
    for v in order[1:]:
        u = parent[v]
        t = tp[u][v]
        d = desc[v]
        n_b = d
        n_c = d * (n - d)
        eff_a, eff_b, eff_c = t, t / n_b, t / n_c
        entries[normalize_edge(u, v)] = EdgeThroughput(
            parent=u,
            child=v,
            tp=t,
            n_a=1,
            n_b=n_b,
            n_c=n_c,
            eff_a=eff_a,
            eff_b=eff_b,
            eff_c=eff_c,
            eff_mixed=(eff_a + eff_b + eff_c) / 3.0,
        )
    return ThroughputReport(root=root, entries=entries)


def full_objective(instance: WnoInstance, topology: Topology) -> tuple[float, NetworkConfig]:
    """f: fbar's best root with greedy channel assignment and interference
    penalty (each edge divided by 1 + same-channel edges sharing an endpoint)."""
    _, base_config = approx_objective(instance, topology)
    root = base_config.root
    report = throughput_report(instance, topology, root)

    # assign channels in decreasing scenario-C congestion, ties by edge id
    edges = sorted(topology.edges, key=lambda e: (-report.entries[e].n_c, e))
    channel: dict[Edge, int] = {}
    for e in edges:
        counts = [0] * N_CHANNELS
        for other, ch in channel.items():
            if other[0] in e or other[1] in e:
                counts[ch] += 1
        channel[e] = min(range(N_CHANNELS), key=lambda c: (counts[c], c))

    worst = float("inf")
    for e in topology.edges:
        conflicts = sum(
            1
            for other, ch in channel.items()
            if other != e and ch == channel[e] and (other[0] in e or other[1] in e)
        )
        val = report.entries[e].eff_mixed / (1 + conflicts)
        if val < worst:
            worst = val
    return worst, NetworkConfig(
        root=root, channel=channel, waveform=base_config.waveform, n_beams=base_config.n_beams
    )
