"""Codebook beam searching: exhaustive-search labels and an FNN shortcut.

The codebook is an oversampled DFT-style grid over the UPA, built as the
Kronecker product of a vertical and a horizontal factor. The exhaustive
search scores every column by achievable rate and keeps the best; the
classifier learns to map the zero-filled partial channel tensor straight
to that column index.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry
from .nn import Dense, Dropout, Flatten, LeakyReLU, Network, Softmax

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class Codebook:
    matrix: np.ndarray  # (n_elements, n_beams), unit-norm columns
    r1: int
    r2: int

    @property
    def n_beams(self):
        return self.matrix.shape[1]


def _axis_factor(n, oversample, spacing_over_lambda):
    cols = oversample * n
    i = np.arange(n)[:, None]
    j = np.arange(cols)[None, :]
    phase = -2j * np.pi * spacing_over_lambda * i * np.cos(np.pi * j / cols)
    return np.exp(phase) / np.sqrt(n)


def build_codebook(geometry: ArrayGeometry, r1=2, r2=2):
    """Kronecker grid codebook with r1 (vertical) and r2 (horizontal)
    oversampling. Every entry has modulus 1/sqrt(n_elements) and every
    column has unit norm."""
    if int(r1) < 1 or int(r2) < 1:
        raise ValueError("oversampling factors must be positive integers")
    c_v = _axis_factor(geometry.n_v, int(r1), geometry.spacing_over_lambda)
    c_h = _axis_factor(geometry.n_h, int(r2), geometry.spacing_over_lambda)
    return Codebook(matrix=np.kron(c_v, c_h), r1=int(r1), r2=int(r2))


def beam_rates(h, g, codebook: Codebook, noise_var):
    """Achievable rate of every codebook column for one channel pair."""
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    eff = (np.asarray(g) * np.asarray(h)).T @ codebook.matrix  # (k, n_beams)
    snr = np.abs(eff) ** 2 / noise_var
    return np.log2(1.0 + snr).mean(axis=0)


def oracle_label(h, g, codebook: Codebook, noise_var):
    """Index of the rate-optimal column; ties resolve to the lowest index."""
    return int(np.argmax(beam_rates(h, g, codebook, noise_var)))


def oracle_labels(hs, gs, codebook: Codebook, noise_var):
    hs = np.asarray(hs)
    gs = np.asarray(gs)
    if hs.shape != gs.shape or hs.ndim != 3:
        raise ValueError("expected matching (batch, n, k) channel stacks")
    return np.array([oracle_label(hs[i], gs[i], codebook, noise_var)
                     for i in range(hs.shape[0])], dtype=np.int64)


def beam_net_layout(n, k, hidden, n_beams, dropout_p=0.5, alpha=0.2):
    """Layer plan for the classifier without allocating any parameters.

    Returns a list of descriptor dicts mirroring build_beam_net. Useful for
    checking full-scale configurations whose weights would not fit in
    memory comfortably.
    """
    hidden = [int(w) for w in hidden]
    if len(hidden) < 1:
        raise ValueError("need at least one hidden layer")
    plan = [{"kind": "flatten", "n_out": n * k * 4}]
    widths = [n * k * 4] + hidden
    for i in range(len(hidden)):
        plan.append({"kind": "dense", "n_in": widths[i], "n_out": widths[i + 1]})
        plan.append({"kind": "leaky_relu", "alpha": alpha})
        if i < len(hidden) - 1:
            plan.append({"kind": "dropout", "p": dropout_p})
    plan.append({"kind": "dense", "n_in": hidden[-1], "n_out": int(n_beams)})
    plan.append({"kind": "softmax"})
    return plan


def layout_param_count(plan):
    total = 0
    for d in plan:
        if d["kind"] == "dense":
            total += d["n_in"] * d["n_out"] + d["n_out"]
    return total


def build_beam_net(n, k, hidden, n_beams, dropout_p=0.5, alpha=0.2,
                   rng=None, dtype=np.float64):
    """Flatten, then dense + LeakyReLU blocks with dropout between hidden
    layers, then a dense softmax head over the codebook columns."""
    layers = []
    for d in beam_net_layout(n, k, hidden, n_beams, dropout_p, alpha):
        if d["kind"] == "flatten":
            layers.append(Flatten())
        elif d["kind"] == "dense":
            layers.append(Dense(d["n_in"], d["n_out"], rng=rng, dtype=dtype))
        elif d["kind"] == "leaky_relu":
            layers.append(LeakyReLU(d["alpha"]))
        elif d["kind"] == "dropout":
            layers.append(Dropout(d["p"]))
        elif d["kind"] == "softmax":
            layers.append(Softmax())
    return Network(layers)


def one_hot(labels, n_classes):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError("label out of range")
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def cross_entropy(probs, labels):
    """Mean negative log-likelihood; probabilities are floored at 1e-12."""
    probs = np.asarray(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or labels.shape != (probs.shape[0],):
        raise ValueError("need (batch, classes) probabilities and (batch,) labels")
    picked = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(picked, PROB_FLOOR))))


def cross_entropy_grad(probs, labels):
    probs = np.asarray(probs)
    labels = np.asarray(labels, dtype=np.int64)
    grad = np.zeros_like(probs)
    picked = np.maximum(probs[np.arange(labels.size), labels], PROB_FLOOR)
    grad[np.arange(labels.size), labels] = -1.0 / (picked * labels.size)
    return grad


def predict_beams(net, zbar, chunk=256):
    """Classifier decisions in inference mode, batched to bound memory."""
    zbar = np.asarray(zbar)
    single = zbar.ndim == 3
    if single:
        zbar = zbar[None]
    picks = []
    for start in range(0, zbar.shape[0], chunk):
        probs = net.forward(zbar[start:start + chunk], train=False)
        picks.append(np.argmax(probs, axis=1))
    out = np.concatenate(picks).astype(np.int64)
    return int(out[0]) if single else out
