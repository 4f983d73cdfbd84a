"""Learned sub-sampling of RIS rows via sequential Gumbel selection.

A trainable logit matrix (one row per active element to place) is turned
into a binary selection by adding Gumbel noise and taking row-wise
argmaxes, excluding indices already taken by earlier rows. The forward
pass uses the hard one-hot rows; the backward pass differentiates the
tempered softmax relaxation instead (straight-through).
"""

import json
from dataclasses import dataclass

import numpy as np

# Logit surrogate for "this column is no longer available". Large enough
# that exp((x + gumbel)/tau) underflows to zero for any realistic draw.
EXCLUDED_LOGIT = -1e30

LOGIT_INIT_VARIANCE = 0.05


def init_logits(m, n, rng, variance=LOGIT_INIT_VARIANCE):
    """Near-uniform starting point: i.i.d. zero-mean Gaussian logits."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return rng.normal(0.0, np.sqrt(variance), size=(m, n))


def class_probs(logits):
    """Row-wise softmax of the raw logits (no temperature, no noise)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def gumbel_from_uniform(u):
    """Map open-interval uniforms to standard Gumbel via -log(-log(u))."""
    u = np.asarray(u, dtype=float)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return -np.log(-np.log(u))


def gumbel_noise(shape, rng):
    return gumbel_from_uniform(rng.random(shape))


@dataclass
class SubsampleMatrix:
    """Row-selection operator: picks ``indices`` out of n_total rows."""

    indices: np.ndarray
    n_total: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("indices must be a nonempty 1-D array")
        if idx.min() < 0 or idx.max() >= self.n_total:
            raise ValueError("selection index out of range")
        if np.unique(idx).size != idx.size:
            raise ValueError("selection indices must be distinct")
        self.indices = idx

    @property
    def m(self):
        return self.indices.size

    def dense(self):
        """Explicit (m, n) 0/1 matrix; the gather path must match S @ Z."""
        s = np.zeros((self.m, self.n_total))
        s[np.arange(self.m), self.indices] = 1.0
        return s


def validate_subsample(s: SubsampleMatrix, n_expected=None):
    """Structural check used inside training loops: one distinct index per
    row, all within range. Raises ValueError on violation."""
    idx = np.asarray(s.indices)
    if n_expected is not None and s.n_total != n_expected:
        raise ValueError("selection built for a different array size")
    if idx.ndim != 1:
        raise ValueError("selection must be one index per row")
    if idx.min() < 0 or idx.max() >= s.n_total:
        raise ValueError("selection index out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("selection rows must hit distinct columns")


@dataclass
class RelaxedSample:
    """One stochastic draw: hard selection plus its softmax relaxation."""

    hard: SubsampleMatrix
    soft: np.ndarray          # (m, n) tempered softmax rows
    noise: np.ndarray         # the Gumbel draw that produced it
    excluded: np.ndarray      # (m, n) bool, True where the column was masked
    tau: float


def sample_selection(logits, tau, rng=None, noise=None):
    """Draw a selection without replacement via the perturbed-argmax trick.

    Rows are processed top to bottom; each row's winning column is masked
    out (logit replaced by a large negative surrogate) for all later rows,
    so the hard rows always land on distinct columns. Pass ``noise`` to
    replay a specific draw, otherwise it is sampled from ``rng``.
    """
    logits = np.asarray(logits, dtype=float)
    m, n = logits.shape
    if m > n:
        raise ValueError("cannot select more rows than available")
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError("temperature must be positive and finite")
    if noise is None:
        if rng is None:
            raise ValueError("need an rng or an explicit noise array")
        noise = gumbel_noise((m, n), rng)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (m, n):
        raise ValueError("noise shape must match logits")

    indices = np.empty(m, dtype=np.int64)
    soft = np.empty((m, n))
    excluded = np.zeros((m, n), dtype=bool)
    taken = np.zeros(n, dtype=bool)
    for row in range(m):
        excluded[row] = taken
        masked = np.where(taken, EXCLUDED_LOGIT, logits[row])
        scores = masked + noise[row]
        win = int(np.argmax(scores))  # ties resolve to the lowest index
        shifted = (scores - scores.max()) / tau
        e = np.exp(shifted)
        soft[row] = e / e.sum()
        indices[row] = win
        taken[win] = True
    hard = SubsampleMatrix(indices=indices, n_total=n)
    return RelaxedSample(hard=hard, soft=soft, noise=noise, excluded=excluded, tau=float(tau))


def subsample(z, s: SubsampleMatrix):
    """Keep the selected rows of z, which is (..., n, k, 4) or (..., n, k)."""
    z = np.asarray(z)
    axis = z.ndim - 3 if z.ndim >= 3 else z.ndim - 2
    if z.shape[axis] != s.n_total:
        raise ValueError("row axis does not match the selection size")
    return np.take(z, s.indices, axis=axis)


def zero_fill(z_sub, s: SubsampleMatrix):
    """Scatter selected rows back to their original slots, zeros elsewhere."""
    z_sub = np.asarray(z_sub)
    axis = z_sub.ndim - 3 if z_sub.ndim >= 3 else z_sub.ndim - 2
    if z_sub.shape[axis] != s.m:
        raise ValueError("row count does not match the selection")
    shape = list(z_sub.shape)
    shape[axis] = s.n_total
    out = np.zeros(shape, dtype=z_sub.dtype)
    key = [slice(None)] * z_sub.ndim
    key[axis] = s.indices
    out[tuple(key)] = z_sub
    return out


def relaxed_zero_fill(sample: RelaxedSample, z):
    """Soft surrogate of subsample + zero_fill used for gradient checks.

    Each selected slot holds the softmax-weighted mixture of all rows
    instead of the hard winner; slots line up with the hard draw so the
    straight-through backward pass is this map's exact gradient.
    """
    z = np.asarray(z, dtype=float)
    single = z.ndim == 3
    if single:
        z = z[None]
    mix = np.einsum("mn,bnkc->bmkc", sample.soft, z)
    out = np.zeros_like(z)
    out[:, sample.hard.indices] = mix
    return out[0] if single else out


def selection_backward(upstream, sample: RelaxedSample, z):
    """Gradient of the loss w.r.t. the logits through the soft relaxation.

    upstream is dLoss/d(zero-filled tensor), shaped like z which is
    (b, n, k, 4) or (n, k, 4). Columns that were excluded for a row come
    out exactly zero because their soft weight underflowed to zero.
    """
    up = np.asarray(upstream, dtype=float)
    z_in = np.asarray(z, dtype=float)
    if up.ndim == 3:
        up = up[None]
    if z_in.ndim == 3:
        z_in = z_in[None]
    if up.shape != z_in.shape:
        raise ValueError("upstream gradient must match the input tensor shape")
    # Only the slots filled by the hard draw carry gradient; row r of the
    # relaxation feeds slot indices[r].
    up_rows = up[:, sample.hard.indices]                                # (b, m, k, 4)
    a = np.tensordot(up_rows, z_in, axes=([0, 2, 3], [0, 2, 3]))        # (m, n)
    soft = sample.soft
    row_dot = (a * soft).sum(axis=1, keepdims=True)
    return soft * (a - row_dot) / sample.tau


def entropy_penalty(logits):
    """Sum of row entropies of the softmax class probabilities (natural log,
    with 0*log(0) taken as 0), negated so that minimizing it sharpens rows."""
    p = class_probs(logits)
    logp = np.log(np.clip(p, np.finfo(float).tiny, 1.0))
    return float(-np.sum(np.where(p > 0.0, p * logp, 0.0)))


def entropy_penalty_grad(logits):
    """d(entropy_penalty)/d(logits), via the softmax Jacobian."""
    p = class_probs(logits)
    logp = np.log(np.clip(p, np.finfo(float).tiny, 1.0))
    g = -(1.0 + logp)
    return p * (g - (p * g).sum(axis=-1, keepdims=True))


def extract_pattern(logits):
    """Deployment-time deterministic selection: greedy row-wise argmax with
    the same without-replacement masking as the stochastic draw, noise off."""
    logits = np.asarray(logits, dtype=float)
    m, n = logits.shape
    taken = np.zeros(n, dtype=bool)
    indices = np.empty(m, dtype=np.int64)
    for row in range(m):
        masked = np.where(taken, EXCLUDED_LOGIT, logits[row])
        win = int(np.argmax(masked))
        indices[row] = win
        taken[win] = True
    return SubsampleMatrix(indices=indices, n_total=n)


def uniform_pattern(m, n):
    """Evenly spaced fixed pattern: row r takes index floor(r * n / m)."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    indices = (np.arange(m) * n) // m
    return SubsampleMatrix(indices=indices.astype(np.int64), n_total=n)


def export_pattern(path, s: SubsampleMatrix, n_v, n_h):
    if n_v * n_h != s.n_total:
        raise ValueError("grid shape does not match the selection size")
    payload = {
        "n_v": int(n_v),
        "n_h": int(n_h),
        "m": int(s.m),
        "indices": [int(i) for i in s.indices],
        "row_major": True,
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def load_pattern(path):
    with open(path) as f:
        payload = json.load(f)
    s = SubsampleMatrix(indices=np.asarray(payload["indices"], dtype=np.int64),
                        n_total=int(payload["n_v"]) * int(payload["n_h"]))
    return s, payload
