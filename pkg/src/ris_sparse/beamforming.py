"""Reflection-coefficient design from (estimated) cascaded channels.

The subcarrier-averaged matched filter gives the continuous unit-norm
optimum; deployment maps its phases onto a b-bit grid with unit-modulus
entries. The eigen solver is a diagnostic only: it maximizes the summed
quadratic objective exactly, which the matched filter only does for a
single subcarrier, and it is not part of the deployed design chain.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseQuantizer:
    bits: int

    def __post_init__(self):
        if int(self.bits) < 1:
            raise ValueError("need at least one phase bit")

    @property
    def n_levels(self):
        return 2 ** int(self.bits)

    @property
    def delta(self):
        return 2.0 * np.pi / self.n_levels

    @property
    def levels(self):
        return self.delta * np.arange(self.n_levels)


def continuous_optimum(h_hat, g_hat):
    """Unit-norm phase conjugation of the subcarrier-summed cascade."""
    h_hat = np.asarray(h_hat)
    g_hat = np.asarray(g_hat)
    if h_hat.shape != g_hat.shape or h_hat.ndim != 2:
        raise ValueError("expected matching (n, k) channel matrices")
    combined = (g_hat * h_hat).sum(axis=1)
    norm = np.linalg.norm(combined)
    if norm == 0.0:
        raise ValueError("cascaded channel sums to zero; optimum undefined")
    return np.conj(combined) / norm


def project_phases(theta):
    """Closest unit-modulus vector entrywise (the b -> infinity limit)."""
    theta = np.asarray(theta)
    return np.exp(1j * np.angle(theta))


def quantize_project(theta, quantizer: PhaseQuantizer):
    """Entrywise nearest grid phase, unit modulus.

    Because the squared distance to a unit-modulus vector separates over
    entries, rounding each phase independently is the exact minimizer of
    ||theta - out|| over the whole grid.
    """
    theta = np.asarray(theta)
    if quantizer is None:
        return project_phases(theta)
    idx = np.round(np.angle(theta) / quantizer.delta).astype(np.int64) % quantizer.n_levels
    return np.exp(1j * quantizer.delta * idx)


def eigen_upper_bound(h, g):
    """Unit-norm maximizer of sum_k |c_k^T theta|^2 (diagnostic only).

    Returns the principal eigenvector of sum_k conj(c_k) c_k^T where
    c_k is the k-th cascaded channel column.
    """
    h = np.asarray(h)
    g = np.asarray(g)
    if h.shape != g.shape or h.ndim != 2:
        raise ValueError("expected matching (n, k) channel matrices")
    c = g * h  # (n, k) columns c_k
    a = np.conj(c) @ c.T
    vals, vecs = np.linalg.eigh(a)
    return vecs[:, -1]
