import numpy as np

from nslearn.wno.features import ADD_EDGE_DIM, DROP_EDGE_DIM, add_features, drop_features
from nslearn.wno.instance import generate_instance
from nslearn.wno.objective import full_objective
from nslearn.wno.topology import Topology, mst_initial


def _setup(n=6, seed=0):
    inst = generate_instance(n, seed=seed)
    t = mst_initial(inst)
    _, cfg = full_objective(inst, t)
    return inst, t, cfg


def test_drop_graph_shapes_and_candidates():
    inst, t, cfg = _setup()
    g = drop_features(inst, t, cfg)
    assert g.node_features.shape == (inst.n, 3)
    assert g.edge_features.shape == (inst.n - 1, DROP_EDGE_DIM)
    assert g.n_items == inst.n - 1  # every tree edge is droppable


def test_normalized_descendants_hit_bounds():
    inst, t, cfg = _setup()
    g = drop_features(inst, t, cfg)
    desc_col = g.node_features[:, 2]
    assert desc_col[cfg.root] == 1.0
    leaves = [v for v in range(inst.n) if sum(1 for e in t.edges if v in e) == 1]
    for v in leaves:
        if v != cfg.root:
            assert desc_col[v] == 0.0


def test_add_graph_on_star_after_drop():
    inst = generate_instance(4, seed=1)
    star = Topology([(0, 1), (0, 2), (0, 3)], n=4)
    _, cfg = full_objective(inst, star)
    g = add_features(inst, star, dropped=(0, 1), config=cfg)
    addable = g.edge_features[:, 0] == 1.0
    assert addable.sum() == 2  # (1,2) and (1,3); the dropped edge is excluded
    assert g.edge_features.shape[1] == ADD_EDGE_DIM
    assert g.n_items == 2
    # remaining tree edges carry edge_type 0
    assert (g.edge_features[: len(star.edges) - 1, 0] == 0.0).all()


def test_candidate_rows_match_sorted_cut():
    inst, t, cfg = _setup(n=7, seed=3)
    dropped = t.edges[0]
    g = add_features(inst, t, dropped, cfg)
    cand_edges = [tuple(g.edges[i]) for i in g.candidates]
    assert cand_edges == sorted(cand_edges)
    assert all(tuple(sorted(e)) != dropped for e in cand_edges)


def test_drop_features_deterministic():
    inst, t, cfg = _setup(n=8, seed=5)
    a = drop_features(inst, t, cfg)
    b = drop_features(inst, t, cfg)
    assert np.array_equal(a.node_features, b.node_features)
    assert np.array_equal(a.edge_features, b.edge_features)
