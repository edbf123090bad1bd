"""Feature graphs for the drop-edge and add-edge classifiers.

Node features are shared by both graphs: coordinates in km and the
normalized descendant count (|desc_v|-1)/(|V|-1) under the current
configuration's root. The droppable graph carries the full radio/config
description per tree edge; the addable graph marks candidate reconnecting
edges with edge_type=1 next to the remaining tree edges.
"""

from __future__ import annotations

import numpy as np

from ..gnn.graphs import FeatureGraph
from .instance import WnoInstance
from .objective import NetworkConfig, throughput_report
from .topology import Edge, Topology, cut_candidates, descendant_counts

__all__ = ["drop_features", "add_features", "DROP_EDGE_DIM", "ADD_EDGE_DIM", "NODE_DIM"]

NODE_DIM = 3
# pass_loss, fade_margin, waveform, channel, n_beams, tp_a, tp_b, tp_c, tp_m, u, v
DROP_EDGE_DIM = 11
# edge_type, pass_loss, fade_margin, u, v
ADD_EDGE_DIM = 5


def _node_features(instance: WnoInstance, topology: Topology, root: int) -> np.ndarray:
    n = instance.n
    desc = descendant_counts(topology, root)
    feats = np.zeros((n, NODE_DIM))
    feats[:, 0] = instance.coords[:, 0]
    feats[:, 1] = instance.coords[:, 1]
    feats[:, 2] = [(d - 1) / (n - 1) for d in desc]
    return feats


def drop_features(
    instance: WnoInstance, topology: Topology, config: NetworkConfig
) -> FeatureGraph:
    """Droppable graph: one candidate item per tree edge."""
    report = throughput_report(instance, topology, config.root)
    nodes = _node_features(instance, topology, config.root)
    edges = list(topology.edges)
    feats = np.zeros((len(edges), DROP_EDGE_DIM))
    for i, e in enumerate(edges):
        u, v = e
        et = report.entries[e]
        feats[i] = [
            instance.path_loss[u, v],
            instance.fade_margin[u, v],
            config.waveform[e],
            config.channel[e],
            config.n_beams[e],
            et.eff_a,
            et.eff_b,
            et.eff_c,
            et.eff_mixed,
            u,
            v,
        ]
    return FeatureGraph(node_features=nodes, edges=np.array(edges), edge_features=feats)


def add_features(
    instance: WnoInstance, topology: Topology, dropped: Edge, config: NetworkConfig
) -> FeatureGraph:
    """Addable graph for the state reached by dropping one tree edge.

    Edges are the remaining tree edges followed by the sorted reconnecting
    candidates (edge_type=1); only the candidates are prediction items. The
    descendant feature keeps the pre-drop orientation.
    """
    nodes = _node_features(instance, topology, config.root)
    remaining = [e for e in topology.edges if e != dropped]
    addable = cut_candidates(topology, dropped)
    edges = remaining + addable
    feats = np.zeros((len(edges), ADD_EDGE_DIM))
    for i, e in enumerate(edges):
        u, v = e
        feats[i] = [
            1.0 if i >= len(remaining) else 0.0,
            instance.path_loss[u, v],
            instance.fade_margin[u, v],
            u,
            v,
        ]
    candidates = np.arange(len(remaining), len(edges))
    return FeatureGraph(
        node_features=nodes,
        edges=np.array(edges),
        edge_features=feats,
        candidates=candidates,
    )
