"""Central-difference gradient verification.

The relative error per coordinate is |a - n| / max(|a|, |n|, floor) where
a is the analytic derivative and n the numeric one. The floor keeps
round-off noise on near-zero coordinates from dominating the report.
"""

import numpy as np

DEFAULT_STEP = 1e-5
DEFAULT_FLOOR = 1e-4


def grad_check_params(loss_fn, grad_fn, params, n_coords=200, step=DEFAULT_STEP,
                      seed=0, rel_floor=DEFAULT_FLOOR):
    """Compare analytic gradients against finite differences.

    loss_fn() evaluates the scalar objective at the current parameter
    values; grad_fn() returns analytic gradient arrays aligned with
    ``params``. Both must be deterministic (pin dropout masks and reuse
    noise draws). Coordinates are sampled without replacement across the
    concatenation of all parameters, or exhaustively if there are fewer
    than ``n_coords``. Returns the max relative error over the sample.
    """
    params = list(params)
    grads = [np.asarray(g) for g in grad_fn()]
    if len(grads) != len(params):
        raise ValueError("grad_fn must return one array per parameter")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError("analytic gradient shape mismatch")

    sizes = [p.size for p in params]
    total = int(np.sum(sizes))
    if total == 0:
        raise ValueError("no parameters to check")
    rng = np.random.default_rng(seed)
    n_pick = min(n_coords, total)
    flat_ids = rng.choice(total, size=n_pick, replace=False)
    bounds = np.cumsum([0] + sizes)

    worst = 0.0
    for fid in flat_ids:
        pi = int(np.searchsorted(bounds, fid, side="right") - 1)
        li = int(fid - bounds[pi])
        p = params[pi]
        orig = p.flat[li]
        p.flat[li] = orig + step
        lp = float(loss_fn())
        p.flat[li] = orig - step
        lm = float(loss_fn())
        p.flat[li] = orig
        if not (np.isfinite(lp) and np.isfinite(lm)):
            raise ValueError("loss is not finite during finite differencing")
        numeric = (lp - lm) / (2.0 * step)
        analytic = float(grads[pi].flat[li])
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), rel_floor)
        worst = max(worst, rel)
    return worst


def grad_check(network, loss_fn, x, n_coords=200, step=DEFAULT_STEP, seed=0,
               train=False, rng=None, rel_floor=DEFAULT_FLOOR):
    """Check a network end to end.

    loss_fn(output) -> (scalar loss, dLoss/dOutput). With train=True any
    dropout layers are frozen so repeated forwards see the same masks.
    """
    if train:
        network.freeze_dropout(True)
        network.forward(x, train=True, rng=rng)  # draws and pins the masks

    def loss_only():
        y = network.forward(x, train=train, rng=rng)
        return loss_fn(y)[0]

    def analytic():
        y = network.forward(x, train=train, rng=rng)
        _, dy = loss_fn(y)
        network.zero_grads()
        network.backward(dy)
        return [g.copy() for g in network.grad_arrays()]

    try:
        return grad_check_params(loss_only, analytic, network.param_arrays(),
                                 n_coords=n_coords, step=step, seed=seed,
                                 rel_floor=rel_floor)
    finally:
        if train:
            network.freeze_dropout(False)
