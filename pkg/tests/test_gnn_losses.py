import math

import numpy as np
import pytest

from nslearn.gnn.losses import LossSpec, cross_entropy, focal_loss, wce_loss


class TestWce:
    def test_perfect_predictions_vanish(self):
        labels = np.array([1, 0, 1, 0])
        probs = labels.astype(float)
        assert wce_loss(probs, labels, 0.8) <= 1e-10

    def test_hand_value(self):
        # single item, y=1, p=0.5, lambda=0.7 -> 0.7 * ln 2
        assert wce_loss(np.array([0.5]), np.array([1]), 0.7) == pytest.approx(
            0.7 * math.log(2.0), abs=1e-15
        )

    def test_half_lambda_is_half_cross_entropy(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            k = int(rng.integers(1, 12))
            probs = rng.random(k)
            labels = rng.integers(0, 2, size=k)
            assert abs(
                wce_loss(probs, labels, 0.5) - 0.5 * cross_entropy(probs, labels)
            ) < 1e-12

    def test_lambda_range_enforced(self):
        with pytest.raises(ValueError):
            wce_loss(np.array([0.5]), np.array([1]), 0.4)

    def test_clamping_keeps_loss_finite(self):
        assert math.isfinite(wce_loss(np.array([0.0, 1.0]), np.array([1, 0]), 0.9))


class TestFocal:
    def test_gamma_zero_alpha_one_is_cross_entropy(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            k = int(rng.integers(1, 10))
            probs = rng.random(k)
            labels = rng.integers(0, 2, size=k)
            assert focal_loss(probs, labels, alpha=1.0, gamma=0.0) == pytest.approx(
                cross_entropy(probs, labels), rel=1e-12
            )

    def test_hand_value(self):
        # y=1, p=0.9, gamma=2, alpha=1 -> 0.01 * (-ln 0.9)
        got = focal_loss(np.array([0.9]), np.array([1]), alpha=1.0, gamma=2.0)
        assert got == pytest.approx(0.01 * -math.log(0.9), rel=1e-12)

    def test_well_classified_items_fade_faster_than_ce(self):
        p = np.array([0.99])
        y = np.array([1])
        ratio = focal_loss(p, y, 1.0, 2.0) / cross_entropy(p, y)
        assert ratio == pytest.approx((1 - 0.99) ** 2, rel=1e-9)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            focal_loss(np.array([0.5]), np.array([1]), alpha=0.0, gamma=2.0)
        with pytest.raises(ValueError):
            focal_loss(np.array([0.5]), np.array([1]), alpha=1.0, gamma=-1.0)


class TestLossSpecGradients:
    def _fd_check(self, spec, labels, logits, eps=1e-7):
        from nslearn.gnn.model import softmax2

        _, dlogits = spec.value_and_dlogits(softmax2(logits), labels)
        for (i, j) in [(0, 0), (0, 1), (1, 0), (2, 1)]:
            lp = logits.copy()
            lp[i, j] += eps
            lm = logits.copy()
            lm[i, j] -= eps
            fd = (
                spec.value(softmax2(lp), labels) - spec.value(softmax2(lm), labels)
            ) / (2 * eps)
            assert dlogits[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-10)

    def test_wce_logit_gradient(self):
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(3, 2))
        labels = np.array([1, 0, 1])
        self._fd_check(LossSpec("wce", lam=0.75), labels, logits)

    def test_focal_logit_gradient(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(3, 2))
        labels = np.array([0, 1, 0])
        self._fd_check(LossSpec("focal", alpha=0.7, gamma=2.0), labels, logits)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            LossSpec("mse")
