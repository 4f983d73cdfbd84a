import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_sparse.extrapolation import (ExtrapNetSpec, build_extrap_net,
                                      extrapolate, mse_loss, mse_loss_grad,
                                      nmse)
from ris_sparse.nn import Adam, AdamConfig, Conv2D, ReLU, Residual


class TestSpec:
    def test_default_conv_count(self):
        # 1 input conv plus 5 iterations of (1 + 6 + 1) convs.
        spec = ExtrapNetSpec()
        assert spec.n_conv_layers == 41

    def test_small_conv_count(self):
        assert ExtrapNetSpec(2, 2, 16).n_conv_layers == 9

    def test_validation(self):
        with pytest.raises(ValueError):
            ExtrapNetSpec(n_iterations=0)
        with pytest.raises(ValueError):
            ExtrapNetSpec(n_relu_per_iteration=0)
        with pytest.raises(ValueError):
            ExtrapNetSpec(hidden_channels=0)
        with pytest.raises(ValueError):
            ExtrapNetSpec(kernel=4)


class TestBuildNet:
    def test_layer_census(self):
        spec = ExtrapNetSpec(3, 2, 8)
        net = build_extrap_net(spec)
        convs = net.conv_layers()
        assert len(convs) == spec.n_conv_layers == 13
        # Channel plan: first residual is 4 -> 4; each iteration runs
        # 4 -> 4 -> 8 (ReLU) -> 8 (ReLU appears once more) ... -> 4.
        assert convs[0].in_channels == 4 and convs[0].out_channels == 4
        assert convs[1].in_channels == 4 and convs[2].out_channels == 8
        assert convs[4].out_channels == 4

    def test_zero_init_is_identity(self):
        net = build_extrap_net(ExtrapNetSpec(2, 2, 6))
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 8, 8, 4))
        assert np.array_equal(net.forward(x, train=False), x)

    def test_random_init_deterministic(self):
        spec = ExtrapNetSpec(2, 1, 6)
        a = build_extrap_net(spec, rng=np.random.default_rng(5))
        b = build_extrap_net(spec, rng=np.random.default_rng(5))
        for pa, pb in zip(a.param_arrays(), b.param_arrays()):
            assert np.array_equal(pa, pb)

    def test_matches_hand_chained_layers(self):
        # One iteration with one ReLU conv: identical layer chain built by
        # hand must produce bitwise equal outputs for shared weights.
        spec = ExtrapNetSpec(1, 1, 5)
        net = build_extrap_net(spec, rng=np.random.default_rng(7))
        convs = net.conv_layers()
        hand_first = Residual([Conv2D(4, 4, 3, pad=1)])
        hand_iter = Residual([Conv2D(4, 4, 3, pad=1),
                              Conv2D(4, 5, 3, pad=1), ReLU(),
                              Conv2D(5, 4, 3, pad=1)])
        hand_convs = [hand_first.body[0]] + [
            l for l in hand_iter.body if isinstance(l, Conv2D)]
        for mine, hand in zip(convs, hand_convs):
            hand.params["w"][...] = mine.params["w"]
            hand.params["b"][...] = mine.params["b"]
        rng = np.random.default_rng(8)
        x = rng.normal(size=(2, 6, 7, 4))
        mid = hand_first.forward(x, train=False)
        expect = hand_iter.forward(mid, train=False)
        assert np.array_equal(net.forward(x, train=False), expect)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(3, 9), st.integers(3, 9))
    def test_preserves_spatial_shape(self, n, k):
        net = build_extrap_net(ExtrapNetSpec(1, 1, 4),
                               rng=np.random.default_rng(1))
        out = net.forward(np.zeros((1, n, k, 4)), train=False)
        assert out.shape == (1, n, k, 4)


class TestExtrapolate:
    def test_single_and_batch_agree(self):
        net = build_extrap_net(ExtrapNetSpec(1, 1, 4),
                               rng=np.random.default_rng(2))
        rng = np.random.default_rng(3)
        x = rng.normal(size=(2, 6, 6, 4))
        batch = extrapolate(net, x)
        assert batch.shape == (2, 6, 6, 4)
        assert np.allclose(extrapolate(net, x[0]), batch[0])


class TestLosses:
    def test_mse_hand_value(self):
        pred = np.array([[1.0, 2.0], [3.0, 4.0]])
        target = np.array([[1.0, 0.0], [0.0, 4.0]])
        assert mse_loss(pred, target) == pytest.approx((4 + 9) / 4)

    def test_mse_matches_loop_oracle(self):
        rng = np.random.default_rng(4)
        p = rng.normal(size=(2, 3, 4, 4))
        t = rng.normal(size=(2, 3, 4, 4))
        acc = 0.0
        for idx in np.ndindex(p.shape):
            acc += (p[idx] - t[idx]) ** 2
        assert mse_loss(p, t) == pytest.approx(acc / p.size)

    def test_mse_grad_finite_difference(self):
        rng = np.random.default_rng(5)
        p = rng.normal(size=(3, 4))
        t = rng.normal(size=(3, 4))
        g = mse_loss_grad(p, t)
        step = 1e-6
        for idx in np.ndindex(p.shape):
            q = p.copy()
            q[idx] += step
            hi = mse_loss(q, t)
            q[idx] -= 2 * step
            lo = mse_loss(q, t)
            assert g[idx] == pytest.approx((hi - lo) / (2 * step), abs=1e-8)

    def test_mse_validation(self):
        with pytest.raises(ValueError):
            mse_loss(np.zeros((2, 2)), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            mse_loss(np.zeros((0, 2)), np.zeros((0, 2)))


class TestNmse:
    def test_perfect_estimate_is_zero(self):
        rng = np.random.default_rng(6)
        h = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        g = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        assert nmse(h, g, h, g) == 0.0

    def test_zero_estimate_is_one(self):
        rng = np.random.default_rng(7)
        h = rng.normal(size=(2, 4, 8)) + 1j * rng.normal(size=(2, 4, 8))
        g = rng.normal(size=(2, 4, 8)) + 1j * rng.normal(size=(2, 4, 8))
        zh, zg = np.zeros_like(h), np.zeros_like(g)
        assert nmse(zh, zg, h, g) == pytest.approx(1.0)

    def test_double_estimate_is_one(self):
        # 2H has error |H|, so the ratio is exactly one again.
        rng = np.random.default_rng(8)
        h = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        g = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        assert nmse(2 * h, 2 * g, h, g) == pytest.approx(1.0)

    def test_batch_average_of_per_sample_ratios(self):
        # Sample 0 perfect, sample 1 zero estimate: mean ratio is 0.5 even
        # if the two samples carry very different energies.
        rng = np.random.default_rng(9)
        h = rng.normal(size=(2, 4, 8)) + 1j * rng.normal(size=(2, 4, 8))
        g = rng.normal(size=(2, 4, 8)) + 1j * rng.normal(size=(2, 4, 8))
        h[1] *= 40.0
        g[1] *= 40.0
        h_hat = h.copy()
        g_hat = g.copy()
        h_hat[1] = 0.0
        g_hat[1] = 0.0
        assert nmse(h_hat, g_hat, h, g) == pytest.approx(0.5)

    def test_zero_truth_rejected(self):
        z = np.zeros((2, 2), dtype=complex)
        with pytest.raises(ValueError):
            nmse(z, z, z, z)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            nmse(np.zeros((2, 2)), np.zeros((2, 2)),
                 np.zeros((2, 3)), np.zeros((2, 2)))


class TestOptimizationSanity:
    def test_loss_decreases_from_identity(self):
        # Tiny regression: does the scheme make progress on a fixed batch
        # for essentially every draw of the data?
        wins = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            net = build_extrap_net(ExtrapNetSpec(1, 1, 6))
            x = rng.normal(size=(4, 6, 6, 4))
            target = x + 0.3 * rng.normal(size=x.shape)
            opt = Adam(net.param_arrays(), AdamConfig(learning_rate=1e-3))
            first = mse_loss(net.forward(x, train=False), target)
            for _ in range(50):
                net.zero_grads()
                pred = net.forward(x, train=True)
                net.backward(mse_loss_grad(pred, target))
                opt.step(net.grad_arrays())
            last = mse_loss(net.forward(x, train=False), target)
            if last < first:
                wins += 1
        assert wins >= 9
