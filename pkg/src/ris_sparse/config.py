"""Run configuration: dataclasses, JSON round-trip, seed override.

Config files are flat JSON objects with exactly the dataclass fields.
Unknown keys are rejected so typos fail loudly. The environment variable
RIS_SPARSE_SEED, when set, overrides the seed of any config loaded from
disk.
"""

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

SEED_ENV_VAR = "RIS_SPARSE_SEED"


@dataclass
class DatasetConfig:
    """Synthetic link dataset: geometry, OFDM grid, multipath statistics."""

    n_v: int = 4
    n_h: int = 4
    k_subcarriers: int = 16
    bandwidth_hz: float = 100e6
    f_a_hz: float = 2.4e9
    f_c_hz: float = 2.5e9
    spacing_over_lambda: float = 0.5
    paths: int = 5
    sample_count: int = 2000
    seed: int = 0
    power_decay: float = 1.0
    delay_span_fraction: float = 0.25
    elevation_min: float = float(np.pi / 6)
    elevation_max: float = float(5 * np.pi / 6)
    azimuth_min: float = float(-np.pi / 2)
    azimuth_max: float = float(np.pi / 2)
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.n_v < 1 or self.n_h < 1:
            raise ValueError("grid dimensions must be positive")
        if self.k_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.bandwidth_hz <= 0 or self.f_a_hz <= 0 or self.f_c_hz <= 0:
            raise ValueError("frequencies must be positive")
        if self.paths < 1:
            raise ValueError("need at least one path")
        if self.sample_count < 1:
            raise ValueError("need at least one sample")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")

    @property
    def n_elements(self):
        return self.n_v * self.n_h

    @property
    def sample_period_s(self):
        return 1.0 / self.bandwidth_hz

    @classmethod
    def full_scale(cls, **overrides):
        """8x8 grid, 64 subcarriers: the reference large configuration."""
        base = dict(n_v=8, n_h=8, k_subcarriers=64)
        base.update(overrides)
        return cls(**base)


@dataclass
class TrainConfig:
    """One training run for either scheme.

    The loop is iteration-based; reports convert to epochs using the
    dataset size. eta_xi drives the selection logits, eta_omega the
    network weights, and their ratio must be at least 1.
    """

    scheme: str = "extrapolation"
    r: float = 0.25
    strategy: str = "prob"
    eta_xi: float = 1e-3
    eta_omega: float = 1e-4
    rho: float = 1e-4
    tau_start: float = 5.0
    tau_end: float = 0.5
    batch: int = 16
    n_iter: int = 3000
    seed: int = 0
    precision: str = "float64"
    target_mode: str = "cross"
    subcarrier_gap: int = 0
    window: int = 0
    measurement_snr_db: float | None = None
    extrap_iterations: int = 5
    extrap_relu_layers: int = 6
    extrap_channels: int = 64
    beam_hidden: tuple = (16384, 4096, 4096, 2048)
    dropout: float = 0.5
    leaky_alpha: float = 0.2
    codebook_r1: int = 2
    codebook_r2: int = 2
    sigma2: float = 1e-3
    log_every: int = 50
    eval_every: int = 500

    def __post_init__(self):
        if self.scheme == "extrap":
            self.scheme = "extrapolation"
        if self.scheme not in ("extrapolation", "beam"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.strategy not in ("prob", "unif"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.r <= 1.0:
            raise ValueError("compression ratio r must lie in (0, 1]")
        if self.eta_xi <= 0 or self.eta_omega <= 0:
            raise ValueError("learning rates must be positive")
        if self.eta_xi / self.eta_omega < 1.0:
            raise ValueError("logit rate must be at least the weight rate (ratio >= 1)")
        if self.rho < 0:
            raise ValueError("entropy penalty weight must be nonnegative")
        if not self.tau_start >= self.tau_end > 0:
            raise ValueError("need tau_start >= tau_end > 0")
        if self.batch < 1 or self.n_iter < 1:
            raise ValueError("batch and n_iter must be positive")
        if self.precision not in ("float64", "float32"):
            raise ValueError("precision must be float64 or float32")
        if self.target_mode not in ("cross", "same"):
            raise ValueError("target_mode must be cross or same")
        if self.subcarrier_gap < 0 or self.window < 0:
            raise ValueError("subcarrier_gap and window must be nonnegative")
        if self.subcarrier_gap > 0 and self.window == 0:
            raise ValueError("a nonzero subcarrier_gap needs an explicit window")
        self.beam_hidden = tuple(int(w) for w in self.beam_hidden)

    @property
    def rate_ratio(self):
        return self.eta_xi / self.eta_omega

    @property
    def dtype(self):
        return np.float64 if self.precision == "float64" else np.float32

    def keep_count(self, n_elements):
        """M = r * N, which must be an integer."""
        m = self.r * n_elements
        m_int = int(round(m))
        if abs(m - m_int) > 1e-9 or m_int < 1:
            raise ValueError(f"r * N = {m} is not a positive integer")
        return m_int

    @classmethod
    def full_scale_extrapolation(cls, **overrides):
        base = dict(scheme="extrapolation", eta_xi=1e-3, eta_omega=1e-4,
                    rho=1e-4, batch=16)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def full_scale_beam(cls, **overrides):
        base = dict(scheme="beam", eta_xi=1e-2, eta_omega=1e-4, rho=1e-4,
                    batch=256)
        base.update(overrides)
        return cls(**base)


def _to_jsonable(cfg):
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def save_config(cfg, path):
    with open(path, "w") as f:
        json.dump(_to_jsonable(cfg), f, indent=1, sort_keys=True)
        f.write("\n")


def load_config(path, cls, env=None):
    """Load a config dataclass from JSON, applying the seed override."""
    env = os.environ if env is None else env
    with open(path) as f:
        raw = json.load(f)
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if SEED_ENV_VAR in env:
        raw["seed"] = int(env[SEED_ENV_VAR])
    return cls(**raw)


def config_hash(cfg):
    """Stable short hash of the full config contents."""
    blob = json.dumps(_to_jsonable(cfg), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
