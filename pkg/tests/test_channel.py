import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_sparse.channel import (ArrayGeometry, OfdmGrid, PathSet,
                                achievable_rate, build_tensor, freq_channel,
                                gen_pathset, split_tensor, steering_vector)


def make_grid(k=16, ts=1e-8, carrier=2.5e9):
    return OfdmGrid(k, ts, carrier)


class TestGeometryAndGrid:
    def test_element_count(self):
        assert ArrayGeometry(4, 4).n_elements == 16
        assert ArrayGeometry(8, 8).n_elements == 64

    def test_validation(self):
        with pytest.raises(ValueError):
            ArrayGeometry(0, 4)
        with pytest.raises(ValueError):
            ArrayGeometry(4, 4, spacing_over_lambda=0.0)
        with pytest.raises(ValueError):
            OfdmGrid(0, 1e-8, 2.5e9)
        with pytest.raises(ValueError):
            OfdmGrid(16, -1e-8, 2.5e9)

    def test_with_carrier(self):
        g = make_grid(carrier=2.4e9).with_carrier(2.5e9)
        assert g.carrier_hz == 2.5e9
        assert g.k_subcarriers == 16


class TestSteeringVector:
    def test_unit_modulus_and_first_entry(self):
        geom = ArrayGeometry(3, 5)
        a = steering_vector(geom, 0.7, -0.3)
        assert a.shape == (15,)
        assert np.allclose(np.abs(a), 1.0)
        assert a[0] == 1.0 + 0.0j

    def test_kron_layout(self):
        # Element (i, j) sits at flat index i * n_h + j.
        geom = ArrayGeometry(2, 3, spacing_over_lambda=0.5)
        el, az = 1.1, 0.4
        a = steering_vector(geom, el, az)
        u = np.cos(el)
        v = np.sin(el) * np.cos(az)
        for i in range(2):
            for j in range(3):
                expect = np.exp(-2j * np.pi * 0.5 * (i * u + j * v))
                assert np.allclose(a[i * 3 + j], expect)

    def test_broadside_all_ones(self):
        # elevation pi/2, azimuth pi/2: u = cos(pi/2) = 0 and v = 0.
        geom = ArrayGeometry(4, 4)
        a = steering_vector(geom, np.pi / 2, np.pi / 2)
        assert np.allclose(a, 1.0)


class TestPathSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            PathSet(np.array([]), np.array([]), np.array([]), np.array([]))
        with pytest.raises(ValueError):
            PathSet(np.ones(2), np.zeros(3), np.zeros(2), np.zeros(2))

    def test_gains_at_carrier_phase(self):
        ps = PathSet(np.array([2.0 + 0j]), np.array([1e-9]),
                     np.array([1.0]), np.array([0.0]))
        g = ps.gains_at(2.5e9)
        assert np.allclose(g, 2.0 * np.exp(-2j * np.pi * 2.5e9 * 1e-9))
        assert np.allclose(np.abs(g), 2.0)

    def test_gen_pathset_unit_power_and_bounds(self):
        grid = make_grid()
        ps = gen_pathset(5, grid, seed=3)
        assert ps.n_paths == 5
        assert np.isclose(np.sum(np.abs(ps.amplitudes) ** 2), 1.0)
        span = 0.25 * grid.k_subcarriers * grid.sample_period_s
        assert np.all(ps.delays_s >= 0) and np.all(ps.delays_s < span)

    def test_gen_pathset_deterministic(self):
        grid = make_grid()
        a = gen_pathset(4, grid, seed=11)
        b = gen_pathset(4, grid, seed=11)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert np.array_equal(a.delays_s, b.delays_s)

    def test_gen_pathset_rejects_zero_paths(self):
        with pytest.raises(ValueError):
            gen_pathset(0, make_grid(), seed=0)


def dft_oracle(paths, geom, grid, taps):
    """Time-domain build: accumulate per-tap impulse response, then DFT.

    Valid when every delay is an integer number of sample periods.
    """
    n = geom.n_elements
    k = grid.k_subcarriers
    gains = paths.gains_at(grid.carrier_hz)
    imp = np.zeros((n, k), dtype=complex)
    for p in range(paths.n_paths):
        a = steering_vector(geom, paths.elevations_rad[p], paths.azimuths_rad[p])
        imp[:, taps[p]] += gains[p] * a
    return np.fft.fft(imp, axis=1) / np.sqrt(k)


class TestFreqChannel:
    def test_matches_dft_oracle_on_integer_taps(self):
        rng = np.random.default_rng(42)
        geom = ArrayGeometry(3, 4)
        grid = make_grid(k=16)
        for _ in range(100):
            taps = rng.integers(0, grid.k_subcarriers, size=3)
            ps = PathSet(
                amplitudes=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                delays_s=taps * grid.sample_period_s,
                elevations_rad=rng.uniform(0.2, np.pi - 0.2, 3),
                azimuths_rad=rng.uniform(-np.pi / 2, np.pi / 2, 3),
            )
            h = freq_channel(ps, geom, grid)
            oracle = dft_oracle(ps, geom, grid, taps)
            rel = np.linalg.norm(h - oracle) / np.linalg.norm(oracle)
            assert rel < 1e-10

    def test_shape_and_finite(self):
        geom = ArrayGeometry(4, 4)
        grid = make_grid()
        h = freq_channel(gen_pathset(5, grid, seed=1), geom, grid)
        assert h.shape == (16, 16)
        assert np.all(np.isfinite(h))

    @given(el=st.floats(0.1, 3.0), az=st.floats(-1.5, 1.5))
    @settings(max_examples=30, deadline=None)
    def test_frobenius_norm_angle_invariant_single_path(self, el, az):
        # Steering phases are unit-modulus, so for one path the channel
        # energy depends only on the gain, never on the direction.
        geom = ArrayGeometry(3, 3)
        grid = make_grid(k=8)
        amp = 0.8 - 0.4j
        ps = PathSet(np.array([amp]), np.array([2.5e-9]),
                     np.array([el]), np.array([az]))
        h = freq_channel(ps, geom, grid)
        expect = geom.n_elements * abs(amp) ** 2
        assert np.isclose(np.linalg.norm(h) ** 2, expect, rtol=1e-9)


class TestChannelTensor:
    def test_round_trip_bit_exact(self, rng):
        h = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        g = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        z = build_tensor(h, g)
        assert z.shape == (5, 7, 4)
        h2, g2 = split_tensor(z)
        assert np.array_equal(h, h2)
        assert np.array_equal(g, g2)

    def test_slice_order(self, rng):
        h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        z = build_tensor(h, g)
        assert np.array_equal(z[..., 0], h.real)
        assert np.array_equal(z[..., 1], h.imag)
        assert np.array_equal(z[..., 2], g.real)
        assert np.array_equal(z[..., 3], g.imag)

    def test_errors(self, rng):
        h = rng.standard_normal((3, 3))
        with pytest.raises(ValueError):
            build_tensor(h, rng.standard_normal((3, 4)))
        with pytest.raises(ValueError):
            split_tensor(rng.standard_normal((3, 3, 3)))


class TestAchievableRate:
    def test_hand_value(self):
        h = np.array([[2.0 + 0j]])
        g = np.array([[1.0 + 0j]])
        theta = np.array([1.0 + 0j])
        assert np.isclose(achievable_rate(h, g, theta, 1.0), np.log2(5.0))

    def test_mean_over_subcarriers(self):
        h = np.array([[1.0, 2.0]]) + 0j
        g = np.ones((1, 2)) + 0j
        theta = np.array([1.0 + 0j])
        expect = 0.5 * (np.log2(1 + 1 / 0.5) + np.log2(1 + 4 / 0.5))
        assert np.isclose(achievable_rate(h, g, theta, 0.5), expect)

    @given(phase=st.floats(-np.pi, np.pi))
    @settings(max_examples=30, deadline=None)
    def test_global_phase_invariance(self, phase):
        rng = np.random.default_rng(5)
        h = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        g = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        theta = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        r0 = achievable_rate(h, g, theta, 1e-2)
        r1 = achievable_rate(h, g, theta * np.exp(1j * phase), 1e-2)
        assert np.isclose(r0, r1, rtol=1e-10)

    def test_rejects_bad_noise(self):
        h = np.ones((2, 2)) + 0j
        with pytest.raises(ValueError):
            achievable_rate(h, h, np.ones(2), 0.0)
