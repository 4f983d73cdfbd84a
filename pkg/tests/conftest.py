import numpy as np
import pytest

from ris_sparse.config import DatasetConfig
from ris_sparse.dataio import gen_data, read_dataset


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_dataset_path(tmp_path_factory):
    """Small on-disk dataset shared by io/training/cli tests."""
    cfg = DatasetConfig(n_v=2, n_h=2, k_subcarriers=8, sample_count=40,
                        paths=3, seed=7)
    path = tmp_path_factory.mktemp("data") / "tiny.bin"
    gen_data(cfg, path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_dataset_path):
    return read_dataset(tiny_dataset_path)
