"""Channel completion CNN built as an unrolled proximal-gradient scheme.

The zero-filled tensor (n, k, 4) passes through an input correction stage
and then a fixed number of unrolled iterations. Each iteration applies a
linear 3x3 conv (a learned gradient step), a small ReLU conv stack, and a
linear conv back to 4 channels (a learned proximal map), added residually
onto the iterate. Every stage is wrapped residually, so the all-zero
network is the exact identity map; training only has to learn the
correction on top of the zero-filled input.
"""

from dataclasses import dataclass

import numpy as np

from .nn import Conv2D, Network, ReLU, Residual


@dataclass(frozen=True)
class ExtrapNetSpec:
    """Shape of the unrolled estimator.

    n_iterations unrolled steps, each with one gradient-step conv,
    n_relu_per_iteration ReLU convs, and one output conv. Total conv
    count is 1 + n_iterations * (n_relu_per_iteration + 2).
    """

    n_iterations: int = 5
    n_relu_per_iteration: int = 6
    hidden_channels: int = 64
    kernel: int = 3

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("need at least one unrolled iteration")
        if self.n_relu_per_iteration < 1:
            raise ValueError("need at least one ReLU conv per iteration")
        if self.hidden_channels < 1:
            raise ValueError("hidden_channels must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError("kernel must be odd so padding preserves shape")

    @property
    def n_conv_layers(self):
        return 1 + self.n_iterations * (self.n_relu_per_iteration + 2)


def build_extrap_net(spec: ExtrapNetSpec, rng=None, dtype=np.float64):
    """Assemble the network; rng=None gives the all-zero (identity) net."""
    pad = spec.kernel // 2

    def conv(c_in, c_out):
        return Conv2D(c_in, c_out, kernel=spec.kernel, pad=pad, stride=1,
                      rng=rng, dtype=dtype)

    layers = [Residual([conv(4, 4)])]
    for _ in range(spec.n_iterations):
        body = [conv(4, 4), conv(4, spec.hidden_channels), ReLU()]
        for _ in range(spec.n_relu_per_iteration - 1):
            body += [conv(spec.hidden_channels, spec.hidden_channels), ReLU()]
        body.append(conv(spec.hidden_channels, 4))
        layers.append(Residual(body))
    return Network(layers)


def extrapolate(net, zbar):
    """Run the estimator in inference mode on (n, k, 4) or (b, n, k, 4)."""
    zbar = np.asarray(zbar)
    single = zbar.ndim == 3
    out = net.forward(zbar[None] if single else zbar, train=False)
    return out[0] if single else out


def mse_loss(pred, target):
    """Mean squared error over every real entry of the batch."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError("prediction and target shapes differ")
    if pred.size == 0:
        raise ValueError("empty batch")
    d = pred - target
    return float(np.mean(d * d))


def mse_loss_grad(pred, target):
    pred = np.asarray(pred)
    target = np.asarray(target)
    return 2.0 * (pred - target) / pred.size


def nmse(h_hat, g_hat, h, g):
    """Per-sample normalized squared error, averaged over the batch.

    Numerator and denominator pool both links: (|H_hat - H|^2 + |G_hat - G|^2)
    over (|H|^2 + |G|^2), Frobenius norms per sample.
    """
    h_hat, g_hat, h, g = map(np.asarray, (h_hat, g_hat, h, g))
    if h_hat.shape != h.shape or g_hat.shape != g.shape:
        raise ValueError("estimate and truth shapes differ")
    single = h.ndim == 2
    if single:
        h_hat, g_hat, h, g = h_hat[None], g_hat[None], h[None], g[None]
    axes = tuple(range(1, h.ndim))
    num = (np.abs(h_hat - h) ** 2).sum(axis=axes) + (np.abs(g_hat - g) ** 2).sum(axis=axes)
    den = (np.abs(h) ** 2).sum(axis=axes) + (np.abs(g) ** 2).sum(axis=axes)
    if np.any(den == 0.0):
        raise ValueError("true channel has zero energy; nmse undefined")
    return float(np.mean(num / den))
