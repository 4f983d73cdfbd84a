"""Joint training of the selection logits and the task network.

Both schemes share one loop skeleton: draw a mini-batch, draw a hard
selection by perturbed argmax (or use the fixed evenly spaced pattern),
subsample and zero-fill the input tensors, run the task network, and take
Adam steps with separate learning rates for the network weights and the
selection logits. The temperature follows a linear schedule across
iterations.

Metric rows are plain CSV with repr()-formatted floats, so identical
config + seed + dataset reproduce byte-identical files.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .beamsearch import (build_beam_net, cross_entropy, cross_entropy_grad,
                         predict_beams)
from .channel import build_tensor
from .config import TrainConfig, config_hash, save_config
from .dataio import Dataset
from .extrapolation import (ExtrapNetSpec, build_extrap_net, mse_loss,
                            mse_loss_grad, nmse)
from .nn import Adam, AdamConfig, save_checkpoint
from .selection import (entropy_penalty, entropy_penalty_grad,
                        export_pattern, extract_pattern, init_logits,
                        sample_selection, selection_backward, subsample,
                        uniform_pattern, validate_subsample, zero_fill)

EXTRAP_METRIC_COLUMNS = ("epoch", "split", "loss_c", "loss_s", "rho", "tau",
                         "nmse", "r", "strategy", "seed")
BEAM_METRIC_COLUMNS = ("epoch", "split", "loss_b", "loss_s", "rho", "tau",
                       "accuracy", "r", "strategy", "seed")


def tau_at(cfg: TrainConfig, iteration):
    """Temperature of the given 1-based iteration (linear decay)."""
    if not 1 <= iteration <= cfg.n_iter:
        raise ValueError("iteration out of range")
    if cfg.n_iter == 1:
        return cfg.tau_start
    step = (cfg.tau_start - cfg.tau_end) / (cfg.n_iter - 1)
    return cfg.tau_start - (iteration - 1) * step


def scheme_tensors(data: Dataset, cfg: TrainConfig):
    """(inputs, targets) as (count, n, k', 4) arrays in the run precision.

    Cross mode feeds the f_a pair and regresses the f_c pair; same mode
    uses the f_c pair on both sides. A nonzero window slices the input to
    the first `window` subcarriers and the target to the same-length block
    shifted by `subcarrier_gap`.
    """
    if cfg.target_mode == "same":
        src_h, src_g = data.h, data.g
    else:
        src_h, src_g = data.h_a, data.g_a
    tgt_h, tgt_g = data.h, data.g
    if cfg.window > 0:
        if cfg.subcarrier_gap + cfg.window > data.k_subcarriers:
            raise ValueError("window plus gap exceeds the subcarrier count")
        in_cols = slice(0, cfg.window)
        tgt_cols = slice(cfg.subcarrier_gap, cfg.subcarrier_gap + cfg.window)
    else:
        in_cols = tgt_cols = slice(None)
    z_in = build_tensor(src_h[:, :, in_cols], src_g[:, :, in_cols]).astype(cfg.dtype)
    z_tgt = build_tensor(tgt_h[:, :, tgt_cols], tgt_g[:, :, tgt_cols]).astype(cfg.dtype)
    return z_in, z_tgt


def _split_batch(z):
    """Complex (H, G) views of a (..., n, k, 4) tensor."""
    return z[..., 0] + 1j * z[..., 1], z[..., 2] + 1j * z[..., 3]


def _add_measurement_noise(z_sub, snr_db, rng):
    """AWGN on the sensed rows before zero-filling, at the given SNR."""
    p_sig = 2.0 * float(np.mean(z_sub ** 2))
    if p_sig == 0.0:
        return z_sub
    std = np.sqrt(p_sig * 10.0 ** (-snr_db / 10.0) / 2.0)
    return z_sub + rng.normal(0.0, std, size=z_sub.shape).astype(z_sub.dtype)


def _format_cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_metrics_csv(path, columns, rows):
    with open(path, "w") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_format_cell(v) for v in row) + "\n")


@dataclass
class TrainResult:
    scheme: str
    config: TrainConfig
    network: object
    logits: np.ndarray | None
    pattern: object
    columns: tuple
    rows: list
    report: dict
    selection_checks: int = 0
    extras: dict = field(default_factory=dict)


class _LoopState:
    """Shared setup for both schemes: rng streams, pattern source, Adam."""

    def __init__(self, data: Dataset, cfg: TrainConfig):
        n = data.n_elements
        self.m = cfg.keep_count(n)
        self.n = n
        train_idx = data.train_indices
        if cfg.batch > train_idx.size:
            raise ValueError("dataset too small for the requested batch size")
        ss = np.random.SeedSequence(cfg.seed)
        (self.net_rng, self.logit_rng, self.batch_rng,
         self.gumbel_rng, self.dropout_rng, self.noise_rng) = (
            np.random.default_rng(c) for c in ss.spawn(6))
        self.train_idx = train_idx
        self.test_idx = data.test_indices
        if cfg.strategy == "prob":
            self.logits = init_logits(self.m, n, self.logit_rng)
            self.fixed_pattern = None
        else:
            self.logits = None
            self.fixed_pattern = uniform_pattern(self.m, n)
        self.selection_checks = 0

    def draw_pattern(self, cfg, tau):
        if cfg.strategy == "prob":
            sample = sample_selection(self.logits, tau, rng=self.gumbel_rng)
            pattern = sample.hard
        else:
            sample = None
            pattern = self.fixed_pattern
        validate_subsample(pattern, self.n)
        self.selection_checks += 1
        return sample, pattern

    def deployed_pattern(self, cfg):
        if cfg.strategy == "prob":
            return extract_pattern(self.logits)
        return self.fixed_pattern

    def entropy_terms(self, cfg):
        if cfg.strategy == "prob":
            return entropy_penalty(self.logits), entropy_penalty_grad(self.logits)
        return 0.0, None


def deploy_inputs(z_in, pattern, net, chunk=128):
    """Zero-filled deterministic-pattern inputs pushed through the net."""
    preds = []
    for start in range(0, z_in.shape[0], chunk):
        zb = z_in[start:start + chunk]
        zbar = zero_fill(subsample(zb, pattern), pattern)
        preds.append(net.forward(zbar, train=False))
    return np.concatenate(preds, axis=0)


def eval_extrapolation(net, pattern, z_in, z_tgt, chunk=128):
    """(test loss, test NMSE) at a fixed pattern, inference mode."""
    pred = deploy_inputs(z_in, pattern, net, chunk=chunk)
    h_hat, g_hat = _split_batch(pred)
    h_t, g_t = _split_batch(z_tgt)
    return mse_loss(pred, z_tgt), nmse(h_hat, g_hat, h_t, g_t)


def eval_beam(net, pattern, z_in, labels, chunk=256):
    """(test loss, top-1 accuracy) at a fixed pattern, inference mode."""
    losses = []
    hits = 0
    for start in range(0, z_in.shape[0], chunk):
        zb = z_in[start:start + chunk]
        zbar = zero_fill(subsample(zb, pattern), pattern)
        probs = net.forward(zbar, train=False)
        y = labels[start:start + chunk]
        losses.append(cross_entropy(probs, y) * zb.shape[0])
        hits += int(np.sum(np.argmax(probs, axis=1) == y))
    loss = float(np.sum(losses) / z_in.shape[0])
    return loss, hits / z_in.shape[0]


def _should_log(cfg, i):
    return i == 1 or i == cfg.n_iter or i % cfg.log_every == 0


def _should_eval(cfg, i):
    return i == cfg.n_iter or i % cfg.eval_every == 0


def train_extrapolation(data: Dataset, cfg: TrainConfig, out_dir=None):
    if cfg.scheme != "extrapolation":
        raise ValueError("config scheme is not extrapolation")
    state = _LoopState(data, cfg)
    z_in, z_tgt = scheme_tensors(data, cfg)
    spec = ExtrapNetSpec(cfg.extrap_iterations, cfg.extrap_relu_layers,
                         cfg.extrap_channels)
    net = build_extrap_net(spec, rng=state.net_rng, dtype=cfg.dtype)
    adam_w = Adam(net.param_arrays(), AdamConfig(cfg.eta_omega))
    adam_xi = (Adam([state.logits], AdamConfig(cfg.eta_xi))
               if cfg.strategy == "prob" else None)
    n_train = state.train_idx.size
    rows = []
    init_loss, init_nmse = eval_extrapolation(
        net, state.deployed_pattern(cfg), z_in[state.test_idx],
        z_tgt[state.test_idx])
    rows.append((0.0, "test", init_loss, state.entropy_terms(cfg)[0], cfg.rho,
                 tau_at(cfg, 1), init_nmse, cfg.r, cfg.strategy, cfg.seed))

    for i in range(1, cfg.n_iter + 1):
        tau = tau_at(cfg, i)
        batch_idx = state.batch_rng.choice(state.train_idx, size=cfg.batch,
                                           replace=False)
        sample, pattern = state.draw_pattern(cfg, tau)
        zb = z_in[batch_idx]
        z_sub = subsample(zb, pattern)
        if cfg.measurement_snr_db is not None:
            z_sub = _add_measurement_noise(z_sub, cfg.measurement_snr_db,
                                           state.noise_rng)
        zbar = zero_fill(z_sub, pattern)
        pred = net.forward(zbar, train=True, rng=state.dropout_rng)
        target = z_tgt[batch_idx]
        loss_c = mse_loss(pred, target)
        loss_s, ent_grad = state.entropy_terms(cfg)

        net.zero_grads()
        dzbar = net.backward(mse_loss_grad(pred, target))
        adam_w.step(net.grad_arrays())
        if cfg.strategy == "prob":
            grad_xi = selection_backward(dzbar, sample, zb) + cfg.rho * ent_grad
            adam_xi.step([grad_xi])

        epoch = i * cfg.batch / n_train
        if _should_log(cfg, i):
            h_hat, g_hat = _split_batch(pred)
            h_t, g_t = _split_batch(target)
            rows.append((epoch, "train", loss_c, loss_s, cfg.rho, tau,
                         nmse(h_hat, g_hat, h_t, g_t), cfg.r, cfg.strategy,
                         cfg.seed))
        if _should_eval(cfg, i):
            deployed = state.deployed_pattern(cfg)
            test_loss, test_nmse = eval_extrapolation(
                net, deployed, z_in[state.test_idx], z_tgt[state.test_idx])
            rows.append((epoch, "test", test_loss, loss_s, cfg.rho, tau,
                         test_nmse, cfg.r, cfg.strategy, cfg.seed))

    pattern = state.deployed_pattern(cfg)
    test_loss, test_nmse = eval_extrapolation(
        net, pattern, z_in[state.test_idx], z_tgt[state.test_idx])
    report = _report(data, cfg, state, {"test_loss": test_loss,
                                        "test_nmse": test_nmse},
                     initial={"test_loss": init_loss,
                              "test_nmse": init_nmse})
    result = TrainResult(scheme="extrapolation", config=cfg, network=net,
                         logits=state.logits, pattern=pattern,
                         columns=EXTRAP_METRIC_COLUMNS, rows=rows,
                         report=report,
                         selection_checks=state.selection_checks)
    if out_dir is not None:
        save_run(out_dir, result, data)
    return result


def train_beam(data: Dataset, labels, cfg: TrainConfig, out_dir=None,
               label_meta=None):
    if cfg.scheme != "beam":
        raise ValueError("config scheme is not beam")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (data.sample_count,):
        raise ValueError("need exactly one label per dataset sample")
    if label_meta is not None and label_meta.get("dataset_sha256") != data.sha256:
        raise ValueError("label cache was built for a different dataset")
    n_beams = (cfg.codebook_r1 * data.meta["n_v"]) * (cfg.codebook_r2 * data.meta["n_h"])
    if labels.min() < 0 or labels.max() >= n_beams:
        raise ValueError("label index outside the configured codebook")

    state = _LoopState(data, cfg)
    z_in, _ = scheme_tensors(data, cfg)
    net = build_beam_net(data.n_elements, z_in.shape[2], cfg.beam_hidden,
                         n_beams, cfg.dropout, cfg.leaky_alpha,
                         rng=state.net_rng, dtype=cfg.dtype)
    adam_w = Adam(net.param_arrays(), AdamConfig(cfg.eta_omega))
    adam_xi = (Adam([state.logits], AdamConfig(cfg.eta_xi))
               if cfg.strategy == "prob" else None)
    n_train = state.train_idx.size
    rows = []
    init_loss, init_acc = eval_beam(
        net, state.deployed_pattern(cfg), z_in[state.test_idx],
        labels[state.test_idx])
    rows.append((0.0, "test", init_loss, state.entropy_terms(cfg)[0], cfg.rho,
                 tau_at(cfg, 1), init_acc, cfg.r, cfg.strategy, cfg.seed))

    for i in range(1, cfg.n_iter + 1):
        tau = tau_at(cfg, i)
        batch_idx = state.batch_rng.choice(state.train_idx, size=cfg.batch,
                                           replace=False)
        sample, pattern = state.draw_pattern(cfg, tau)
        zb = z_in[batch_idx]
        z_sub = subsample(zb, pattern)
        if cfg.measurement_snr_db is not None:
            z_sub = _add_measurement_noise(z_sub, cfg.measurement_snr_db,
                                           state.noise_rng)
        zbar = zero_fill(z_sub, pattern)
        probs = net.forward(zbar, train=True, rng=state.dropout_rng)
        y = labels[batch_idx]
        loss_b = cross_entropy(probs, y)
        loss_s, ent_grad = state.entropy_terms(cfg)
        acc = float(np.mean(np.argmax(probs, axis=1) == y))

        net.zero_grads()
        dzbar = net.backward(cross_entropy_grad(probs, y))
        adam_w.step(net.grad_arrays())
        if cfg.strategy == "prob":
            grad_xi = selection_backward(dzbar, sample, zb) + cfg.rho * ent_grad
            adam_xi.step([grad_xi])

        epoch = i * cfg.batch / n_train
        if _should_log(cfg, i):
            rows.append((epoch, "train", loss_b, loss_s, cfg.rho, tau, acc,
                         cfg.r, cfg.strategy, cfg.seed))
        if _should_eval(cfg, i):
            deployed = state.deployed_pattern(cfg)
            test_loss, test_acc = eval_beam(
                net, deployed, z_in[state.test_idx], labels[state.test_idx])
            rows.append((epoch, "test", test_loss, loss_s, cfg.rho, tau,
                         test_acc, cfg.r, cfg.strategy, cfg.seed))

    pattern = state.deployed_pattern(cfg)
    test_loss, test_acc = eval_beam(net, pattern, z_in[state.test_idx],
                                    labels[state.test_idx])
    report = _report(data, cfg, state, {"test_loss": test_loss,
                                        "test_accuracy": test_acc,
                                        "n_beams": n_beams},
                     initial={"test_loss": init_loss,
                              "test_accuracy": init_acc})
    result = TrainResult(scheme="beam", config=cfg, network=net,
                         logits=state.logits, pattern=pattern,
                         columns=BEAM_METRIC_COLUMNS, rows=rows,
                         report=report,
                         selection_checks=state.selection_checks)
    if out_dir is not None:
        save_run(out_dir, result, data)
    return result


def _report(data, cfg, state, final, initial=None):
    report = {
        "scheme": cfg.scheme,
        "config_hash": config_hash(cfg),
        "dataset_sha256": data.sha256,
        "seed": cfg.seed,
        "r": cfg.r,
        "strategy": cfg.strategy,
        "epochs": cfg.n_iter * cfg.batch / state.train_idx.size,
        "iterations": cfg.n_iter,
        "selection_checks": state.selection_checks,
        "final": final,
    }
    if initial is not None:
        report["initial"] = initial
    return report


def save_run(out_dir, result: TrainResult, data: Dataset):
    """Persist one run: config echo, metrics, checkpoint, pattern, report."""
    import json

    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    save_config(cfg, os.path.join(out_dir, "config.json"))
    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), result.columns,
                      result.rows)
    save_checkpoint(os.path.join(out_dir, "model.ckpt"), result.network,
                    extra={"scheme": result.scheme,
                           "config_hash": config_hash(cfg),
                           "dataset_sha256": data.sha256})
    if result.logits is not None:
        np.save(os.path.join(out_dir, "logits.npy"), result.logits)
    export_pattern(os.path.join(out_dir, "pattern.json"), result.pattern,
                   data.meta["n_v"], data.meta["n_h"])
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(result.report, f, indent=1, sort_keys=True)
        f.write("\n")
