import numpy as np
import pytest

from nslearn.wno.instance import WnoInstance, generate_instance


def test_same_seed_gives_bitwise_identical_instances():
    a = generate_instance(10, seed=5)
    b = generate_instance(10, seed=5)
    assert np.array_equal(a.coords, b.coords)
    assert np.array_equal(a.path_loss, b.path_loss)
    assert np.array_equal(a.fade_margin, b.fade_margin)


def test_distance_constraints_hold():
    for seed in range(8):
        inst = generate_instance(10, seed=seed)
        d = inst.pairwise_distances()
        iu = np.triu_indices(inst.n, 1)
        mean = d[iu].mean()
        assert abs(mean - 10.0) / 10.0 < 1e-6
        assert d[iu].min() > 2.0
        assert d[iu].max() < 150.0


def test_matrix_shape_and_symmetry():
    inst = generate_instance(7, seed=1)
    for mat in (inst.path_loss, inst.fade_margin):
        assert mat.shape == (7, 7)
        assert np.array_equal(mat, mat.T)
        assert np.all(np.diag(mat) == 0.0)
    iu = np.triu_indices(7, 1)
    assert np.all(inst.path_loss[iu] >= 80.0) and np.all(inst.path_loss[iu] <= 160.0)
    assert np.all(inst.fade_margin[iu] >= 5.0) and np.all(inst.fade_margin[iu] <= 15.0)


def test_small_n_rejected():
    with pytest.raises(ValueError):
        generate_instance(2, seed=0)


def test_attempt_cap_raises_loudly():
    with pytest.raises(RuntimeError):
        generate_instance(30, seed=0, max_attempts=50)


def test_json_round_trip():
    inst = generate_instance(6, seed=9)
    back = WnoInstance.from_json(inst.to_json())
    assert back.n == inst.n and back.seed == inst.seed
    assert np.array_equal(back.coords, inst.coords)
    assert np.array_equal(back.path_loss, inst.path_loss)
    assert np.array_equal(back.fade_margin, inst.fade_margin)
