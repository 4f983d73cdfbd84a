"""Finite-difference audits of every layer type and both full chains.

The full-chain checks run the relaxed (softmax-weighted) selection forward
with a frozen Gumbel draw, so the straight-through analytic gradient is
exactly the derivative of the program being differenced. Dropout masks are
pinned for the same reason. Everything runs in double precision at reduced
scale.
"""

import numpy as np

from .beamsearch import build_beam_net, cross_entropy, cross_entropy_grad
from .extrapolation import (ExtrapNetSpec, build_extrap_net, mse_loss,
                            mse_loss_grad)
from .nn import (Conv2D, Dense, Dropout, Flatten, LeakyReLU, Network, ReLU,
                 Residual, Softmax, grad_check, grad_check_params)
from .selection import (entropy_penalty, entropy_penalty_grad, gumbel_noise,
                        init_logits, relaxed_zero_fill, sample_selection,
                        selection_backward)


def _sq_loss(target):
    def loss_fn(y):
        d = y - target
        return float(np.sum(d * d)), 2.0 * d
    return loss_fn


def _kick_biases(net, rng, scale=0.1):
    """Move biases off zero for the audit.

    Zero-filled slots give exactly-zero conv windows, and a zero bias then
    parks the pre-activation exactly on the ReLU kink, where central
    differences disagree with any one-sided derivative. Checking at a
    generic parameter point avoids that measure-zero pathology without
    touching the code under test.
    """
    for path, arr in net.param_items():
        if path.endswith(".b"):
            arr[...] = rng.normal(0.0, scale, size=arr.shape)


def check_layer_types(seed=0, n_coords=120):
    """Each layer type inside a tiny net with a quadratic loss."""
    rng = np.random.default_rng(seed)
    results = {}

    x_img = rng.standard_normal((2, 6, 5, 3))
    x_strided = rng.standard_normal((2, 7, 5, 3))  # odd dims fit stride 2
    cases = {
        "conv2d": Network([Conv2D(3, 4, kernel=3, pad=1, stride=1, rng=rng)]),
        "conv2d_strided": Network([Conv2D(3, 2, kernel=3, pad=1, stride=2, rng=rng)]),
        "relu": Network([Conv2D(3, 4, rng=rng), ReLU(), Conv2D(4, 2, rng=rng)]),
        "residual": Network([Residual([Conv2D(3, 3, rng=rng), ReLU(),
                                       Conv2D(3, 3, rng=rng)])]),
    }
    for name, net in cases.items():
        x = x_strided if name == "conv2d_strided" else x_img
        y = net.forward(x)
        target = rng.standard_normal(y.shape)
        results[name] = grad_check(net, _sq_loss(target), x,
                                   n_coords=n_coords, seed=seed)

    x_flat = rng.standard_normal((4, 7))
    cases = {
        "dense": Network([Dense(7, 5, rng=rng)]),
        "leaky_relu": Network([Dense(7, 6, rng=rng), LeakyReLU(0.2),
                               Dense(6, 3, rng=rng)]),
        "softmax": Network([Dense(7, 5, rng=rng), Softmax()]),
        "flatten": Network([Flatten(), Dense(6 * 5 * 3, 4, rng=rng)]),
    }
    for name, net in cases.items():
        x = x_img if name == "flatten" else x_flat
        y = net.forward(x)
        target = rng.standard_normal(y.shape)
        results[name] = grad_check(net, _sq_loss(target), x,
                                   n_coords=n_coords, seed=seed)

    drop_net = Network([Dense(7, 8, rng=rng), Dropout(0.5), Dense(8, 3, rng=rng)])
    y = drop_net.forward(x_flat, train=False)
    target = rng.standard_normal(y.shape)
    results["dropout_frozen"] = grad_check(
        drop_net, _sq_loss(target), x_flat, n_coords=n_coords, seed=seed,
        train=True, rng=np.random.default_rng(seed + 1))
    return results


def _chain_check(net, logits, tau, noise, z_in, loss_pair, rho,
                 n_coords, seed, train=False):
    """FD check of loss(net(relaxed_select(z_in))) + rho * entropy."""
    loss_of, grad_of = loss_pair

    def forward():
        sample = sample_selection(logits, tau, noise=noise)
        zbar = relaxed_zero_fill(sample, z_in)
        pred = net.forward(zbar, train=train)
        return sample, pred

    def loss_fn():
        _, pred = forward()
        return loss_of(pred) + rho * entropy_penalty(logits)

    def grad_fn():
        sample, pred = forward()
        net.zero_grads()
        dzbar = net.backward(grad_of(pred))
        g_logits = (selection_backward(dzbar, sample, z_in)
                    + rho * entropy_penalty_grad(logits))
        return [g_logits] + [g.copy() for g in net.grad_arrays()]

    params = [logits] + net.param_arrays()
    return grad_check_params(loss_fn, grad_fn, params, n_coords=n_coords,
                             seed=seed)


def check_extrap_chain(seed=0, n_coords=200, n=16, k=16, m=4, batch=2):
    rng = np.random.default_rng(seed)
    z_in = rng.standard_normal((batch, n, k, 4))
    z_tgt = rng.standard_normal((batch, n, k, 4))
    logits = init_logits(m, n, rng)
    noise = gumbel_noise((m, n), rng)
    net = build_extrap_net(ExtrapNetSpec(2, 2, 16), rng=rng)
    _kick_biases(net, rng)
    pair = (lambda p: mse_loss(p, z_tgt), lambda p: mse_loss_grad(p, z_tgt))
    return _chain_check(net, logits, 1.3, noise, z_in, pair, rho=1e-3,
                        n_coords=n_coords, seed=seed)


def check_beam_chain(seed=0, n_coords=200, n=16, k=16, m=4, n_beams=64,
                     batch=4):
    rng = np.random.default_rng(seed)
    z_in = rng.standard_normal((batch, n, k, 4))
    labels = rng.integers(0, n_beams, size=batch)
    logits = init_logits(m, n, rng)
    noise = gumbel_noise((m, n), rng)
    net = build_beam_net(n, k, (128, 64), n_beams, dropout_p=0.5,
                         alpha=0.2, rng=rng)
    _kick_biases(net, rng)
    net.freeze_dropout(True)
    try:
        # One training forward draws and pins the dropout masks.
        sample = sample_selection(logits, 1.3, noise=noise)
        net.forward(relaxed_zero_fill(sample, z_in), train=True,
                    rng=np.random.default_rng(seed + 1))
        pair = (lambda p: cross_entropy(p, labels),
                lambda p: cross_entropy_grad(p, labels))
        return _chain_check(net, logits, 1.3, noise, z_in, pair, rho=1e-3,
                            n_coords=n_coords, seed=seed, train=True)
    finally:
        net.freeze_dropout(False)


def run_gradcheck(scale="small", verbose=False, seed=0):
    """All audits at the given scale; returns the worst relative error."""
    if scale != "small":
        raise ValueError(f"unknown scale {scale!r}")
    results = check_layer_types(seed=seed)
    results["extrap_chain"] = check_extrap_chain(seed=seed)
    results["beam_chain"] = check_beam_chain(seed=seed)
    worst = 0.0
    for name in sorted(results):
        if verbose:
            print(f"  {name:16s} rel err {results[name]:.3e}")
        worst = max(worst, results[name])
    return worst
