"""Dataset and label-cache persistence.

Dataset file: a raw little-endian float32 stream. Each sample stores the
four matrices H_a, G_a, H, G in that order; each matrix is written
row-major over (n, k) as interleaved (real, imag) pairs. A JSON sidecar
at <path>.json carries the generating parameters, the train/test split
and the stream's sha256.

Label cache: little-endian int32 indices, one per sample, with a sidecar
tying it to the dataset hash and the codebook it was scored against.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, OfdmGrid, freq_channel, gen_pathset
from .config import DatasetConfig

FORMAT_VERSION = 1


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _pack_complex(m):
    return np.ascontiguousarray(
        np.stack([m.real, m.imag], axis=-1), dtype="<f4").tobytes()


def sample_channels(cfg: DatasetConfig, index):
    """The four matrices of one sample, deterministic in (seed, index).

    Both links share their path geometry across the two carriers; only the
    carrier-dependent phase changes between the f_a and f_c matrices.
    """
    geom = ArrayGeometry(cfg.n_v, cfg.n_h, cfg.spacing_over_lambda)
    grid_a = OfdmGrid(cfg.k_subcarriers, cfg.sample_period_s, cfg.f_a_hz)
    grid_c = OfdmGrid(cfg.k_subcarriers, cfg.sample_period_s, cfg.f_c_hz)
    base = cfg.seed + index
    kwargs = dict(
        power_decay=cfg.power_decay,
        delay_span_fraction=cfg.delay_span_fraction,
        elevation_range=(cfg.elevation_min, cfg.elevation_max),
        azimuth_range=(cfg.azimuth_min, cfg.azimuth_max),
    )
    paths_h = gen_pathset(cfg.paths, grid_c, np.random.SeedSequence([base, 0]), **kwargs)
    paths_g = gen_pathset(cfg.paths, grid_c, np.random.SeedSequence([base, 1]), **kwargs)
    h_a = freq_channel(paths_h, geom, grid_a)
    g_a = freq_channel(paths_g, geom, grid_a)
    h = freq_channel(paths_h, geom, grid_c)
    g = freq_channel(paths_g, geom, grid_c)
    return h_a, g_a, h, g


def make_split(sample_count, train_fraction, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    perm = rng.permutation(sample_count)
    n_train = int(round(train_fraction * sample_count))
    n_train = min(max(n_train, 1), sample_count - 1)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def gen_data(cfg: DatasetConfig, out_path):
    """Generate and persist a dataset; returns the stream's sha256.

    Samples are written one at a time so large configurations never hold
    the whole set in memory.
    """
    out_path = str(out_path)
    with open(out_path, "wb") as f:
        for i in range(cfg.sample_count):
            for m in sample_channels(cfg, i):
                f.write(_pack_complex(m))
    sha = file_sha256(out_path)
    train_idx, test_idx = make_split(cfg.sample_count, cfg.train_fraction, cfg.seed)
    sidecar = {
        "format_version": FORMAT_VERSION,
        "n_v": cfg.n_v,
        "n_h": cfg.n_h,
        "k_subcarriers": cfg.k_subcarriers,
        "f_a_hz": cfg.f_a_hz,
        "f_c_hz": cfg.f_c_hz,
        "spacing_over_lambda": cfg.spacing_over_lambda,
        "paths": cfg.paths,
        "sample_count": cfg.sample_count,
        "seed": cfg.seed,
        "bandwidth_hz": cfg.bandwidth_hz,
        "power_decay": cfg.power_decay,
        "delay_span_fraction": cfg.delay_span_fraction,
        "elevation_min": cfg.elevation_min,
        "elevation_max": cfg.elevation_max,
        "azimuth_min": cfg.azimuth_min,
        "azimuth_max": cfg.azimuth_max,
        "train_fraction": cfg.train_fraction,
        "train_indices": [int(i) for i in train_idx],
        "test_indices": [int(i) for i in test_idx],
        "sha256": sha,
    }
    with open(out_path + ".json", "w") as f:
        json.dump(sidecar, f, indent=1, sort_keys=True)
        f.write("\n")
    return sha


@dataclass
class Dataset:
    h_a: np.ndarray  # (count, n, k) complex
    g_a: np.ndarray
    h: np.ndarray
    g: np.ndarray
    meta: dict
    train_indices: np.ndarray
    test_indices: np.ndarray
    sha256: str

    @property
    def sample_count(self):
        return self.h.shape[0]

    @property
    def n_elements(self):
        return self.h.shape[1]

    @property
    def k_subcarriers(self):
        return self.h.shape[2]


def read_dataset(path):
    path = str(path)
    with open(path + ".json") as f:
        meta = json.load(f)
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset version {meta.get('format_version')!r}")
    n = meta["n_v"] * meta["n_h"]
    k = meta["k_subcarriers"]
    count = meta["sample_count"]
    raw = np.fromfile(path, dtype="<f4")
    expected = count * 4 * n * k * 2
    if raw.size != expected:
        raise ValueError(f"dataset stream has {raw.size} floats, expected {expected}")
    cube = raw.astype(np.float64).reshape(count, 4, n, k, 2)
    z = cube[..., 0] + 1j * cube[..., 1]
    sha = file_sha256(path)
    if "sha256" in meta and meta["sha256"] != sha:
        raise ValueError("dataset stream does not match the hash in its sidecar")
    return Dataset(
        h_a=z[:, 0], g_a=z[:, 1], h=z[:, 2], g=z[:, 3],
        meta=meta,
        train_indices=np.asarray(meta["train_indices"], dtype=np.int64),
        test_indices=np.asarray(meta["test_indices"], dtype=np.int64),
        sha256=sha,
    )


def write_labels(path, labels, dataset_sha, r1, r2, sigma2):
    path = str(path)
    labels = np.asarray(labels, dtype="<i4")
    with open(path, "wb") as f:
        f.write(labels.tobytes())
    sidecar = {
        "format_version": FORMAT_VERSION,
        "dataset_sha256": dataset_sha,
        "codebook_r1": int(r1),
        "codebook_r2": int(r2),
        "sigma2": float(sigma2),
        "count": int(labels.size),
    }
    with open(path + ".json", "w") as f:
        json.dump(sidecar, f, indent=1, sort_keys=True)
        f.write("\n")


def read_labels(path):
    path = str(path)
    with open(path + ".json") as f:
        meta = json.load(f)
    labels = np.fromfile(path, dtype="<i4").astype(np.int64)
    if labels.size != meta["count"]:
        raise ValueError("label stream length does not match its sidecar")
    return labels, meta
