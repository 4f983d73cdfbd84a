import numpy as np
import pytest

from ris_sparse.config import (DatasetConfig, TrainConfig, config_hash,
                               load_config, save_config)


class TestDatasetConfig:
    def test_desk_defaults(self):
        cfg = DatasetConfig()
        assert cfg.n_elements == 16
        assert cfg.k_subcarriers == 16
        assert cfg.f_a_hz == 2.4e9
        assert cfg.f_c_hz == 2.5e9
        assert cfg.bandwidth_hz == 100e6
        assert cfg.sample_period_s == 1e-8

    def test_full_scale(self):
        cfg = DatasetConfig.full_scale()
        assert cfg.n_elements == 64
        assert cfg.k_subcarriers == 64
        assert cfg.paths == 5
        assert cfg.spacing_over_lambda == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            DatasetConfig(n_v=0)
        with pytest.raises(ValueError):
            DatasetConfig(sample_count=0)
        with pytest.raises(ValueError):
            DatasetConfig(train_fraction=1.0)
        with pytest.raises(ValueError):
            DatasetConfig(paths=0)


class TestTrainConfig:
    def test_full_scale_extrapolation_values(self):
        cfg = TrainConfig.full_scale_extrapolation()
        assert cfg.eta_xi == 1e-3
        assert cfg.eta_omega == 1e-4
        assert cfg.rho == 1e-4
        assert cfg.batch == 16
        assert cfg.extrap_iterations == 5
        assert cfg.extrap_relu_layers == 6
        assert cfg.extrap_channels == 64
        assert cfg.rate_ratio == pytest.approx(10.0)

    def test_full_scale_beam_values(self):
        cfg = TrainConfig.full_scale_beam()
        assert cfg.scheme == "beam"
        assert cfg.eta_xi == 1e-2
        assert cfg.batch == 256
        assert cfg.beam_hidden == (16384, 4096, 4096, 2048)
        assert cfg.dropout == 0.5
        assert cfg.leaky_alpha == 0.2
        assert cfg.rate_ratio == pytest.approx(100.0)

    def test_keep_count(self):
        cfg = TrainConfig(r=0.25)
        assert cfg.keep_count(16) == 4
        assert cfg.keep_count(64) == 16
        with pytest.raises(ValueError):
            cfg.keep_count(10)

    def test_keep_count_full(self):
        assert TrainConfig(r=1.0).keep_count(16) == 16

    def test_scheme_alias(self):
        assert TrainConfig(scheme="extrap").scheme == "extrapolation"

    def test_rate_ratio_enforced(self):
        with pytest.raises(ValueError):
            TrainConfig(eta_xi=1e-5, eta_omega=1e-4)

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(scheme="other")
        with pytest.raises(ValueError):
            TrainConfig(strategy="random")
        with pytest.raises(ValueError):
            TrainConfig(r=0.0)
        with pytest.raises(ValueError):
            TrainConfig(r=1.5)
        with pytest.raises(ValueError):
            TrainConfig(rho=-1.0)
        with pytest.raises(ValueError):
            TrainConfig(tau_start=0.1, tau_end=0.5)
        with pytest.raises(ValueError):
            TrainConfig(tau_end=0.0)
        with pytest.raises(ValueError):
            TrainConfig(precision="float16")
        with pytest.raises(ValueError):
            TrainConfig(target_mode="other")
        with pytest.raises(ValueError):
            TrainConfig(subcarrier_gap=2, window=0)

    def test_dtype(self):
        assert TrainConfig(precision="float32").dtype == np.float32
        assert TrainConfig().dtype == np.float64


class TestPersistence:
    def test_round_trip(self, tmp_path):
        cfg = TrainConfig(scheme="beam", r=0.25, beam_hidden=(64, 32),
                          seed=11)
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        loaded = load_config(path, TrainConfig, env={})
        assert loaded == cfg

    def test_dataset_round_trip(self, tmp_path):
        cfg = DatasetConfig(n_v=2, n_h=8, seed=5)
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        assert load_config(path, DatasetConfig, env={}) == cfg

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        save_config(TrainConfig(), path)
        blob = path.read_text().replace('"seed"', '"sead"')
        path.write_text(blob)
        with pytest.raises(ValueError):
            load_config(path, TrainConfig, env={})

    def test_env_seed_override(self, tmp_path):
        path = tmp_path / "cfg.json"
        save_config(TrainConfig(seed=0), path)
        loaded = load_config(path, TrainConfig, env={"RIS_SPARSE_SEED": "42"})
        assert loaded.seed == 42

    def test_env_override_ignored_when_absent(self, tmp_path):
        path = tmp_path / "cfg.json"
        save_config(TrainConfig(seed=5), path)
        assert load_config(path, TrainConfig, env={}).seed == 5


class TestHash:
    def test_stable_and_sensitive(self):
        a = config_hash(TrainConfig(seed=0))
        b = config_hash(TrainConfig(seed=0))
        c = config_hash(TrainConfig(seed=1))
        assert a == b
        assert a != c
        assert len(a) == 16
        int(a, 16)

    def test_covers_dataset_config(self):
        assert config_hash(DatasetConfig()) != config_hash(DatasetConfig(seed=9))
