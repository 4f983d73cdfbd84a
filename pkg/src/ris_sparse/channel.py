"""Geometric multipath channel model for a UPA-shaped RIS link.

Generates per-link path geometry, turns it into frequency-domain channel
matrices on an OFDM grid, packs channel pairs into the real-valued tensor
consumed by the networks, and evaluates the achievable rate of a reflection
beamforming vector.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: n_v x n_h elements, spacing in wavelengths."""

    n_v: int
    n_h: int
    spacing_over_lambda: float = 0.5

    def __post_init__(self):
        if self.n_v < 1 or self.n_h < 1:
            raise ValueError("array needs at least one element per dimension")
        if self.spacing_over_lambda <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_v * self.n_h


@dataclass(frozen=True)
class OfdmGrid:
    """OFDM dimensioning: K subcarriers, sample period T_s, carrier frequency."""

    k_subcarriers: int
    sample_period_s: float
    carrier_hz: float

    def __post_init__(self):
        if self.k_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.sample_period_s <= 0:
            raise ValueError("sample period must be positive")

    def with_carrier(self, carrier_hz: float) -> "OfdmGrid":
        return OfdmGrid(self.k_subcarriers, self.sample_period_s, carrier_hz)


@dataclass
class PathSet:
    """Multipath geometry of one link, shared across carriers.

    ``amplitudes`` are the carrier-independent complex path gains; the
    carrier-dependent phase exp(-j*2*pi*f*tau) is applied when a channel
    matrix is synthesized for a specific carrier.
    """

    amplitudes: np.ndarray  # complex (P,)
    delays_s: np.ndarray  # (P,)
    elevations_rad: np.ndarray  # (P,)
    azimuths_rad: np.ndarray  # (P,)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.delays_s = np.asarray(self.delays_s, dtype=float)
        self.elevations_rad = np.asarray(self.elevations_rad, dtype=float)
        self.azimuths_rad = np.asarray(self.azimuths_rad, dtype=float)
        if self.amplitudes.size < 1:
            raise ValueError("a path set needs at least one path")
        shapes = {
            self.amplitudes.shape,
            self.delays_s.shape,
            self.elevations_rad.shape,
            self.azimuths_rad.shape,
        }
        if len(shapes) != 1:
            raise ValueError("per-path arrays must have matching shapes")

    @property
    def n_paths(self) -> int:
        return self.amplitudes.size

    def gains_at(self, carrier_hz: float) -> np.ndarray:
        """Per-path complex gains including the carrier phase rotation."""
        return self.amplitudes * np.exp(-2j * np.pi * carrier_hz * self.delays_s)


def steering_vector(geometry: ArrayGeometry, elevation_rad: float, azimuth_rad: float) -> np.ndarray:
    """Unit-modulus array response of the UPA, vertical-index-major.

    Element (i, j) responds with exp(-j*2*pi*(d/lambda)*(i*u + j*v)) where
    u = cos(elevation) and v = sin(elevation)*cos(azimuth); the flattened
    layout is the Kronecker product of the vertical and horizontal factors.
    """
    u = np.cos(elevation_rad)
    v = np.sin(elevation_rad) * np.cos(azimuth_rad)
    phase = -2j * np.pi * geometry.spacing_over_lambda
    a_v = np.exp(phase * u * np.arange(geometry.n_v))
    a_h = np.exp(phase * v * np.arange(geometry.n_h))
    return np.kron(a_v, a_h)


def gen_pathset(
    p_count: int,
    grid: OfdmGrid,
    seed,
    power_decay: float = 1.0,
    delay_span_fraction: float = 0.25,
    elevation_range=(np.pi / 6, 5 * np.pi / 6),
    azimuth_range=(-np.pi / 2, np.pi / 2),
) -> PathSet:
    """Draw a random multipath geometry, normalized to unit total power.

    Path powers decay as exp(-power_decay * p) before normalization; delays
    are uniform over [0, delay_span_fraction * K * T_s); angles are uniform
    over the given sectors. Deterministic for a fixed seed.
    """
    if p_count < 1:
        raise ValueError("p_count must be >= 1")
    rng = np.random.default_rng(seed)
    profile = np.exp(-power_decay * np.arange(p_count))
    amps = np.sqrt(profile / 2) * (
        rng.standard_normal(p_count) + 1j * rng.standard_normal(p_count)
    )
    amps /= np.linalg.norm(amps)
    delay_span = delay_span_fraction * grid.k_subcarriers * grid.sample_period_s
    delays = rng.uniform(0.0, delay_span, size=p_count)
    elevations = rng.uniform(*elevation_range, size=p_count)
    azimuths = rng.uniform(*azimuth_range, size=p_count)
    return PathSet(amps, delays, elevations, azimuths)


def freq_channel(paths: PathSet, geometry: ArrayGeometry, grid: OfdmGrid) -> np.ndarray:
    """Frequency-domain N x K channel matrix of one link at one carrier.

    Column k sums the path contributions with the per-subcarrier delay
    phase ramp exp(-j*2*pi*k*tau/(K*T_s)), scaled by 1/sqrt(K).
    """
    k_idx = np.arange(grid.k_subcarriers)
    gains = paths.gains_at(grid.carrier_hz)
    # (P, K) phase ramp across subcarriers
    ramp = np.exp(
        -2j * np.pi * np.outer(paths.delays_s, k_idx) / (grid.k_subcarriers * grid.sample_period_s)
    )
    steer = np.stack(
        [steering_vector(geometry, el, az) for el, az in zip(paths.elevations_rad, paths.azimuths_rad)],
        axis=1,
    )  # (N, P)
    return (steer @ (gains[:, None] * ramp)) / np.sqrt(grid.k_subcarriers)


def build_tensor(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Stack two complex N x K matrices into the real N x K x 4 tensor.

    Slice order along the last axis: Re(H), Im(H), Re(G), Im(G).
    """
    h = np.asarray(h)
    g = np.asarray(g)
    if h.shape != g.shape:
        raise ValueError(f"channel shapes differ: {h.shape} vs {g.shape}")
    return np.stack([h.real, h.imag, g.real, g.imag], axis=-1)


def split_tensor(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of build_tensor: recover the complex (H, G) pair."""
    z = np.asarray(z)
    if z.ndim != 3 or z.shape[-1] != 4:
        raise ValueError("expected an N x K x 4 tensor")
    return z[..., 0] + 1j * z[..., 1], z[..., 2] + 1j * z[..., 3]


def achievable_rate(h: np.ndarray, g: np.ndarray, theta: np.ndarray, noise_var: float) -> float:
    """Mean rate over subcarriers of the cascaded reflected link, bits/s/Hz.

    Rate at subcarrier k is log2(1 + |(g_k * h_k)^T theta|^2 / noise_var),
    with * the elementwise product.
    """
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    effective = (np.asarray(g) * np.asarray(h)).T @ np.asarray(theta)  # (K,)
    return float(np.mean(np.log2(1.0 + np.abs(effective) ** 2 / noise_var)))
