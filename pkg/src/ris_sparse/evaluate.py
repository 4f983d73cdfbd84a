"""Evaluation recipes over saved training runs.

Each mode scans run directories (as written by save_run), recomputes the
deployment-time metric on the dataset's test split, and emits one CSV.
Every curve row carries the run's seed and config hash so sweeps stay
attributable.
"""

import dataclasses
import json
import os

import numpy as np

from .beamforming import (PhaseQuantizer, continuous_optimum,
                          quantize_project)
from .beamsearch import build_codebook, oracle_label, predict_beams
from .channel import ArrayGeometry, achievable_rate
from .config import TrainConfig, config_hash, load_config
from .dataio import Dataset
from .nn import load_checkpoint
from .selection import load_pattern, subsample, zero_fill
from .training import (_split_batch, deploy_inputs, eval_beam,
                       eval_extrapolation, scheme_tensors, train_beam,
                       train_extrapolation, write_metrics_csv)


def find_runs(models_dir):
    """Run directories under models_dir (directories holding report.json)."""
    runs = []
    for name in sorted(os.listdir(models_dir)):
        path = os.path.join(models_dir, name)
        if os.path.isdir(path) and os.path.exists(os.path.join(path, "report.json")):
            runs.append(path)
    if not runs:
        raise ValueError(f"no run directories found under {models_dir}")
    return runs


def load_run(run_dir, env=None):
    cfg = load_config(os.path.join(run_dir, "config.json"), TrainConfig,
                      env=env if env is not None else {})
    net, header = load_checkpoint(os.path.join(run_dir, "model.ckpt"))
    pattern, _ = load_pattern(os.path.join(run_dir, "pattern.json"))
    with open(os.path.join(run_dir, "report.json")) as f:
        report = json.load(f)
    return cfg, net, pattern, report


def _check_dataset(report, data: Dataset, run_dir):
    if report.get("dataset_sha256") != data.sha256:
        raise ValueError(f"run {run_dir} was trained on a different dataset")


def eval_nmse_vs_r(models_dir, data: Dataset, out_csv):
    """Test NMSE per run, sorted by strategy then r (extrapolation runs)."""
    rows = []
    for run_dir in find_runs(models_dir):
        cfg, net, pattern, report = load_run(run_dir)
        if cfg.scheme != "extrapolation":
            continue
        _check_dataset(report, data, run_dir)
        z_in, z_tgt = scheme_tensors(data, cfg)
        _, test_nmse = eval_extrapolation(net, pattern,
                                          z_in[data.test_indices],
                                          z_tgt[data.test_indices])
        rows.append((cfg.r, cfg.strategy, test_nmse, cfg.seed,
                     config_hash(cfg), os.path.basename(run_dir)))
    if not rows:
        raise ValueError("no extrapolation runs to evaluate")
    rows.sort(key=lambda t: (t[1], t[0]))
    write_metrics_csv(out_csv, ("r", "strategy", "nmse", "seed",
                                "config_hash", "run"), rows)
    return rows


def eval_gap(models_dir, data: Dataset, out_csv):
    """Test NMSE per run keyed by the subcarrier gap between input/target."""
    rows = []
    for run_dir in find_runs(models_dir):
        cfg, net, pattern, report = load_run(run_dir)
        if cfg.scheme != "extrapolation":
            continue
        _check_dataset(report, data, run_dir)
        z_in, z_tgt = scheme_tensors(data, cfg)
        _, test_nmse = eval_extrapolation(net, pattern,
                                          z_in[data.test_indices],
                                          z_tgt[data.test_indices])
        rows.append((cfg.subcarrier_gap, cfg.strategy, test_nmse, cfg.r,
                     cfg.seed, config_hash(cfg), os.path.basename(run_dir)))
    if not rows:
        raise ValueError("no extrapolation runs to evaluate")
    rows.sort(key=lambda t: (t[1], t[0]))
    write_metrics_csv(out_csv, ("gap", "strategy", "nmse", "r", "seed",
                                "config_hash", "run"), rows)
    return rows


def eval_loss(models_dir, data: Dataset, out_csv):
    """Concatenated training curves of every run, tagged by run id."""
    out_rows = []
    header = None
    for run_dir in find_runs(models_dir):
        cfg, _, _, report = load_run(run_dir)
        _check_dataset(report, data, run_dir)
        chash = config_hash(cfg)
        run_id = os.path.basename(run_dir)
        with open(os.path.join(run_dir, "metrics.csv")) as f:
            lines = f.read().splitlines()
        cols = lines[0].split(",")
        # Scheme column sets differ; normalize the loss column name.
        cols = ["loss" if c in ("loss_c", "loss_b") else c for c in cols]
        cols = ["metric" if c in ("nmse", "accuracy") else c for c in cols]
        this_header = tuple(["run", "scheme", "config_hash"] + cols)
        if header is None:
            header = this_header
        elif header != this_header:
            raise ValueError("run metric files disagree on columns")
        for line in lines[1:]:
            out_rows.append(tuple([run_id, cfg.scheme, chash] + line.split(",")))
    write_metrics_csv(out_csv, header, out_rows)
    return out_rows


def eval_pattern(models_dir, data: Dataset, out_csv):
    """Deployed selection pattern of every run, one row per run."""
    rows = []
    for run_dir in find_runs(models_dir):
        cfg, _, pattern, report = load_run(run_dir)
        _check_dataset(report, data, run_dir)
        chash = config_hash(cfg)
        idx = ";".join(str(int(i)) for i in pattern.indices)
        rows.append((os.path.basename(run_dir), cfg.scheme, cfg.strategy,
                     cfg.r, int(pattern.m), idx, cfg.seed, chash))
    write_metrics_csv(out_csv, ("run", "scheme", "strategy", "r", "m",
                                "indices", "seed", "config_hash"), rows)
    return rows


def eval_rate(models_dir, data: Dataset, out_csv, bits=3, sigma2=None):
    """Per-test-sample achievable rates for every run.

    Extrapolation runs: the estimated channels drive the quantized
    matched-filter reflection design (R_ext), compared against the
    continuous optimum on the true channels (R_ub_cont). Beam runs: the
    classifier's codebook column (R_beam) against the exhaustive-search
    column (R_ub_cb). Blank cells mark rates that do not apply.
    """
    quantizer = PhaseQuantizer(bits)
    rows = []
    geom = ArrayGeometry(data.meta["n_v"], data.meta["n_h"],
                         data.meta["spacing_over_lambda"])
    for run_dir in find_runs(models_dir):
        cfg, net, pattern, report = load_run(run_dir)
        _check_dataset(report, data, run_dir)
        s2 = float(sigma2) if sigma2 is not None else cfg.sigma2
        chash = config_hash(cfg)
        z_in, _ = scheme_tensors(data, cfg)
        test_idx = data.test_indices
        if cfg.scheme == "extrapolation":
            pred = deploy_inputs(z_in[test_idx], pattern, net)
            h_hat, g_hat = _split_batch(pred)
            for j, sid in enumerate(test_idx):
                h, g = data.h[sid], data.g[sid]
                theta = quantize_project(
                    continuous_optimum(h_hat[j], g_hat[j]), quantizer)
                r_ext = achievable_rate(h, g, theta, s2)
                r_cont = achievable_rate(h, g, continuous_optimum(h, g), s2)
                rows.append((int(sid), cfg.r, cfg.strategy, cfg.scheme,
                             repr(r_ext), "", repr(r_cont), "", bits,
                             repr(s2), cfg.seed, chash))
        else:
            codebook = build_codebook(geom, cfg.codebook_r1, cfg.codebook_r2)
            zbar = np.stack([
                zero_fill(subsample(z_in[sid], pattern), pattern)
                for sid in test_idx])
            picks = predict_beams(net, zbar)
            for j, sid in enumerate(test_idx):
                h, g = data.h[sid], data.g[sid]
                best = oracle_label(h, g, codebook, s2)
                r_beam = achievable_rate(h, g, codebook.matrix[:, picks[j]], s2)
                r_cb = achievable_rate(h, g, codebook.matrix[:, best], s2)
                rows.append((int(sid), cfg.r, cfg.strategy, cfg.scheme,
                             "", repr(r_beam), "", repr(r_cb), bits,
                             repr(s2), cfg.seed, chash))
    write_metrics_csv(out_csv, ("sample_id", "r", "strategy", "scheme",
                                "R_ext", "R_beam", "R_ub_cont", "R_ub_cb",
                                "b", "sigma2", "seed", "config_hash"), rows)
    return rows


COMPARISON_COLUMNS = ("r", "strategy", "metric", "scheme", "seed",
                      "config_hash", "run")


def compare_strategies(data: Dataset, base_cfg: TrainConfig, r_values,
                       out_root, labels=None, label_meta=None):
    """Train the learned and the evenly spaced selection from one config.

    Every r in r_values is trained twice (strategy prob and unif) with
    everything else identical, so the two curves differ only in how the
    active elements are chosen. Runs land under out_root and a paired
    comparison.csv summarizes the test metric (NMSE for extrapolation,
    top-1 accuracy for beam searching).
    """
    os.makedirs(out_root, exist_ok=True)
    rows = []
    for strategy in ("prob", "unif"):
        for r in r_values:
            cfg = dataclasses.replace(base_cfg, strategy=strategy, r=r)
            run_name = f"{cfg.scheme}_{strategy}_r{r:g}"
            run_dir = os.path.join(out_root, run_name)
            if cfg.scheme == "extrapolation":
                res = train_extrapolation(data, cfg, out_dir=run_dir)
                metric = res.report["final"]["test_nmse"]
            else:
                if labels is None:
                    raise ValueError("beam comparison needs labels")
                res = train_beam(data, labels, cfg, out_dir=run_dir,
                                 label_meta=label_meta)
                metric = res.report["final"]["test_accuracy"]
            rows.append((r, strategy, metric, cfg.scheme, cfg.seed,
                         config_hash(cfg), run_name))
    rows.sort(key=lambda t: (t[1], t[0]))
    write_metrics_csv(os.path.join(out_root, "comparison.csv"),
                      COMPARISON_COLUMNS, rows)
    return rows


EVAL_MODES = {
    "nmse_vs_r": eval_nmse_vs_r,
    "gap": eval_gap,
    "loss": eval_loss,
    "pattern": eval_pattern,
    "rate": eval_rate,
}
