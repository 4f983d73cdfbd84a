import numpy as np
import pytest

from ris_sparse.nn import Adam, AdamConfig, adam_step


class TestAdamStep:
    def test_first_step_hand_computed(self):
        # With zero moments, one step moves by lr * g/|g| / (1 + eps/|g_hat|)
        # which for any nonzero gradient is just under lr in magnitude.
        cfg = AdamConfig(learning_rate=0.1)
        p = np.array([1.0])
        g = np.array([4.0])
        m = np.zeros(1)
        v = np.zeros(1)
        p1, m1, v1 = adam_step(p, g, m, v, 1, cfg)
        assert np.isclose(m1[0], 0.1 * 4.0)
        assert np.isclose(v1[0], 0.001 * 16.0)
        m_hat = m1[0] / (1 - 0.9)
        v_hat = v1[0] / (1 - 0.999)
        assert np.isclose(p1[0], 1.0 - 0.1 * m_hat / (np.sqrt(v_hat) + 1e-8))
        # bias correction makes the first step essentially full-size
        assert np.isclose(p1[0], 1.0 - 0.1, atol=1e-6)

    def test_second_step_hand_computed(self):
        cfg = AdamConfig(learning_rate=0.5, beta1=0.5, beta2=0.5, epsilon=1e-12)
        p = np.array([0.0])
        m = np.zeros(1)
        v = np.zeros(1)
        p, m, v = adam_step(p, np.array([2.0]), m, v, 1, cfg)
        p, m, v = adam_step(p, np.array([1.0]), m, v, 2, cfg)
        m_want = 0.5 * (0.5 * 2.0) + 0.5 * 1.0
        v_want = 0.5 * (0.5 * 4.0) + 0.5 * 1.0
        assert np.isclose(m[0], m_want)
        assert np.isclose(v[0], v_want)
        m_hat = m_want / (1 - 0.5 ** 2)
        v_hat = v_want / (1 - 0.5 ** 2)
        step1 = 0.5 * (0.5 * 2.0 / (1 - 0.5)) / (np.sqrt(0.5 * 4.0 / (1 - 0.5)) + 1e-12)
        want = -step1 - 0.5 * m_hat / (np.sqrt(v_hat) + 1e-12)
        assert np.isclose(p[0], want)

    def test_rejects_bad_step_count(self):
        cfg = AdamConfig(learning_rate=0.1)
        with pytest.raises(ValueError):
            adam_step(np.zeros(1), np.ones(1), np.zeros(1), np.zeros(1), 0, cfg)


class TestAdamConfig:
    def test_defaults(self):
        cfg = AdamConfig(learning_rate=1e-3)
        assert cfg.beta1 == 0.9
        assert cfg.beta2 == 0.999
        assert cfg.epsilon == 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            AdamConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            AdamConfig(learning_rate=0.1, beta1=1.0)
        with pytest.raises(ValueError):
            AdamConfig(learning_rate=0.1, beta2=-0.1)
        with pytest.raises(ValueError):
            AdamConfig(learning_rate=0.1, epsilon=0.0)


class TestAdamOptimizer:
    def test_moment_shapes_and_counter(self, rng):
        params = [rng.standard_normal((3, 2)), rng.standard_normal(5)]
        opt = Adam(params, AdamConfig(learning_rate=0.01))
        assert opt.t == 0
        assert [m.shape for m in opt.m] == [(3, 2), (5,)]
        opt.step([np.ones((3, 2)), np.ones(5)])
        assert opt.t == 1

    def test_in_place_update(self):
        p = np.array([1.0, 2.0])
        opt = Adam([p], AdamConfig(learning_rate=0.1))
        opt.step([np.array([1.0, -1.0])])
        assert p[0] < 1.0 < 2.0 < p[1] + 0.2  # moved toward the gradient sign

    def test_mismatched_grads_rejected(self):
        opt = Adam([np.zeros(3)], AdamConfig(learning_rate=0.1))
        with pytest.raises(ValueError):
            opt.step([np.zeros(3), np.zeros(2)])
        with pytest.raises(ValueError):
            opt.step([np.zeros(4)])

    def test_converges_on_quadratic(self):
        # minimize (x - 3)^2; Adam should get close within a few hundred steps
        x = np.array([10.0])
        opt = Adam([x], AdamConfig(learning_rate=0.1))
        for _ in range(500):
            opt.step([2.0 * (x - 3.0)])
        assert abs(x[0] - 3.0) < 1e-2
