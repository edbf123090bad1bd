"""Spanning-tree topologies and the edge-swap neighborhood."""

from __future__ import annotations

from typing import Iterator

from .instance import WnoInstance

__all__ = [
    "Topology",
    "normalize_edge",
    "descendant_counts",
    "edge_swap_neighbors",
    "mst_initial",
]

Edge = tuple[int, int]


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Topology:
    """A spanning tree stored as a sorted tuple of (u < v) edges."""

    __slots__ = ("edges", "n")

    def __init__(self, edges, n: int | None = None):
        es = tuple(sorted(normalize_edge(u, v) for u, v in edges))
        nodes = {u for e in es for u in e}
        self.n = n if n is not None else (max(nodes) + 1 if nodes else 0)
        self.edges = es
        if len(es) != self.n - 1 or len(set(es)) != len(es):
            raise ValueError("not a spanning tree: wrong edge count")
        if not self._connected():
            raise ValueError("not a spanning tree: disconnected")

    def _connected(self) -> bool:
        if self.n <= 1:
            return True
        adj = self.adjacency()
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def __eq__(self, other) -> bool:
        return isinstance(other, Topology) and self.edges == other.edges

    def __hash__(self) -> int:
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"Topology({list(self.edges)})"

    def to_edge_list(self) -> list[list[int]]:
        return [list(e) for e in self.edges]


def descendant_counts(topology: Topology, root: int) -> list[int]:
    """Subtree size per node under the root orientation (a node counts itself)."""
    n = topology.n
    if not (0 <= root < n):
        raise ValueError("root is not a node of the topology")
    adj = topology.adjacency()
    parent = [-1] * n
    order = [root]
    parent[root] = root
    for u in order:
        for w in adj[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
    desc = [1] * n
    for u in reversed(order[1:]):
        desc[parent[u]] += desc[u]
    return desc


def _component_after_drop(topology: Topology, dropped: Edge) -> set[int]:
    """Nodes reachable from dropped[0] without crossing the dropped edge."""
    a, b = dropped
    adj = topology.adjacency()
    seen = {a}
    stack = [a]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if (normalize_edge(u, w)) == dropped:
                continue
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def cut_candidates(topology: Topology, dropped: Edge) -> list[Edge]:
    """All reconnecting edges across the cut left by dropping one tree edge,
    excluding the dropped edge itself; sorted."""
    side = _component_after_drop(topology, dropped)
    other = [v for v in range(topology.n) if v not in side]
    out = []
    for a in side:
        for b in other:
            e = normalize_edge(a, b)
            if e != dropped:
                out.append(e)
    out.sort()
    return out


def edge_swap_neighbors(topology: Topology) -> Iterator[tuple[Edge, Edge, Topology]]:
    """Yield (dropped_edge, added_edge, neighbor) for every edge-swap move."""
    for dropped in topology.edges:
        remaining = [e for e in topology.edges if e != dropped]
        for added in cut_candidates(topology, dropped):
            yield dropped, added, Topology(remaining + [added], n=topology.n)


def mst_initial(instance: WnoInstance) -> Topology:
    """Kruskal MST under path_loss + fade_margin; ties break lexicographically."""
    n = instance.n
    w = instance.link_weight()
    edges = sorted(
        ((w[u, v], u, v) for u in range(n) for v in range(u + 1, n)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for _, u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append((u, v))
            if len(chosen) == n - 1:
                break
    return Topology(chosen, n=n)
