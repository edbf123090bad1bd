import numpy as np
import pytest

from nslearn.gnn.graphs import BipartiteGraph, FeatureGraph
from nslearn.gnn.model import (
    BipartiteArch,
    GraphArch,
    bipartite_forward,
    build_param_spec,
    graph_forward,
    init_model,
    message_passing_layer,
)


def _random_graph(rng, n=7, m=9, dn=3, de=4, candidates=None):
    edges = set()
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    edges = sorted(edges)
    return FeatureGraph(
        node_features=rng.normal(size=(n, dn)),
        edges=np.array(edges),
        edge_features=rng.normal(size=(len(edges), de)),
        candidates=candidates,
    )


def _random_bipartite(rng, nv=6, nc=5, de=1):
    edges = [(v, c) for v in range(nv) for c in range(nc) if rng.random() < 0.5]
    if not edges:
        edges = [(0, 0)]
    return BipartiteGraph(
        var_features=rng.normal(size=(nv, 1)),
        cons_features=rng.normal(size=(nc, 1)),
        edges=np.array(edges),
        edge_features=rng.normal(size=(len(edges), de)),
    )


class TestMessagePassingLayer:
    def test_isolated_node_uses_empty_sum(self):
        arch = GraphArch(node_dim=2, edge_dim=1, hidden=4, layers=1)
        model = init_model(arch, seed=0)
        spec = model.spec
        h = 4
        states = np.random.default_rng(1).normal(size=(3, h))
        # node 2 is isolated: messages only between 0 and 1
        src = np.array([0, 1])
        dst = np.array([1, 0])
        ef = np.random.default_rng(2).normal(size=(2, 1))
        out, _ = message_passing_layer(states, src, dst, ef, model.theta, spec, "conv1")
        # recompute node 2 by hand: f_psi(v_2, zeros)
        w1 = spec.view(model.theta, "conv1.upd.w1")
        b1 = spec.view(model.theta, "conv1.upd.b1")
        w2 = spec.view(model.theta, "conv1.upd.w2")
        b2 = spec.view(model.theta, "conv1.upd.b2")
        upd_in = np.concatenate([states[2], np.zeros(h)])
        expected = np.maximum(upd_in @ w1.T + b1, 0.0) @ w2.T + b2
        assert np.allclose(out[2], expected, atol=1e-14)

    def test_zero_weights_leave_update_bias(self):
        arch = GraphArch(node_dim=2, edge_dim=1, hidden=4, layers=1)
        model = init_model(arch, seed=0)
        model.theta[:] = 0.0
        spec = model.spec
        spec.view(model.theta, "conv1.upd.b2")[:] = np.array([1.0, -2.0, 3.0, 0.5])
        states = np.ones((3, 4))
        out, _ = message_passing_layer(
            states, np.array([0]), np.array([1]), np.zeros((1, 1)), model.theta, spec, "conv1"
        )
        assert np.allclose(out, np.array([1.0, -2.0, 3.0, 0.5]))


class TestGraphForward:
    def test_zero_parameters_give_half_half(self):
        rng = np.random.default_rng(0)
        g = _random_graph(rng)
        model = init_model(GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2), seed=1)
        model.theta[:] = 0.0
        probs = graph_forward(model, g)
        assert np.allclose(probs, 0.5)

    def test_output_count_matches_candidates(self):
        rng = np.random.default_rng(1)
        g = _random_graph(rng, candidates=[0, 3, 5])
        model = init_model(GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2), seed=1)
        assert graph_forward(model, g).shape == (3, 2)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            g = _random_graph(rng)
            model = init_model(
                GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2), seed=int(rng.integers(10**6))
            )
            probs = graph_forward(model, g)
            assert np.all(probs > 0) and np.all(probs < 1)
            assert np.max(np.abs(probs.sum(axis=1) - 1.0)) < 1e-12

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = _random_graph(rng)
            model = init_model(
                GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2), seed=int(rng.integers(10**6))
            )
            base = graph_forward(model, g)
            perm = rng.permutation(g.node_features.shape[0])
            remap = np.empty_like(perm)
            remap[perm] = np.arange(len(perm))
            g2 = FeatureGraph(
                node_features=g.node_features[perm],
                edges=remap[g.edges],
                edge_features=g.edge_features,
                candidates=g.candidates,
            )
            assert np.allclose(graph_forward(model, g2), base, atol=1e-12)

    def test_endpoint_order_invariance(self):
        rng = np.random.default_rng(4)
        g = _random_graph(rng)
        model = init_model(GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2), seed=5)
        base = graph_forward(model, g)
        flipped = FeatureGraph(
            node_features=g.node_features,
            edges=g.edges[:, ::-1].copy(),
            edge_features=g.edge_features,
            candidates=g.candidates,
        )
        assert np.allclose(graph_forward(model, flipped), base, atol=1e-12)

    def test_variant_mismatch_rejected(self):
        rng = np.random.default_rng(5)
        g = _random_graph(rng)
        model = init_model(BipartiteArch(var_dim=1, cons_dim=1, edge_dim=1), seed=0)
        with pytest.raises(ValueError):
            graph_forward(model, g)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(6)
        g = _random_graph(rng, dn=2)
        model = init_model(GraphArch(node_dim=3, edge_dim=4), seed=0)
        with pytest.raises(ValueError):
            graph_forward(model, g)


class TestBipartiteForward:
    def test_zero_parameters_give_half_half(self):
        rng = np.random.default_rng(0)
        b = _random_bipartite(rng)
        model = init_model(BipartiteArch(var_dim=1, cons_dim=1, edge_dim=1, hidden=8), seed=1)
        model.theta[:] = 0.0
        assert np.allclose(bipartite_forward(model, b), 0.5)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            b = _random_bipartite(rng)
            model = init_model(
                BipartiteArch(var_dim=1, cons_dim=1, edge_dim=1, hidden=8),
                seed=int(rng.integers(10**6)),
            )
            probs = bipartite_forward(model, b)
            assert probs.shape == (6, 2)
            assert np.max(np.abs(probs.sum(axis=1) - 1.0)) < 1e-12

    def test_variable_permutation_equivariance(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            b = _random_bipartite(rng)
            model = init_model(
                BipartiteArch(var_dim=1, cons_dim=1, edge_dim=1, hidden=8),
                seed=int(rng.integers(10**6)),
            )
            base = bipartite_forward(model, b)
            perm = rng.permutation(b.var_features.shape[0])
            remap = np.empty_like(perm)
            remap[perm] = np.arange(len(perm))
            edges = b.edges.copy()
            edges[:, 0] = remap[edges[:, 0]]
            b2 = BipartiteGraph(
                var_features=b.var_features[perm],
                cons_features=b.cons_features,
                edges=edges,
                edge_features=b.edge_features,
            )
            # predictions for permuted inputs are the permuted predictions
            assert np.allclose(bipartite_forward(model, b2), base[perm], atol=1e-12)


def test_param_count_matches_descriptor():
    arch = GraphArch(node_dim=3, edge_dim=4, hidden=8, layers=2)
    spec = build_param_spec(arch)
    with pytest.raises(ValueError):
        from nslearn.gnn.model import PolicyModel

        PolicyModel(arch=arch, theta=np.zeros(spec.total - 1))
