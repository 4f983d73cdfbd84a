"""Adam optimizer with bias correction."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ValueError("betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def adam_step(param, grad, m, v, t, cfg):
    """One update for a single tensor; returns (param, m, v) as new arrays.

    t is the 1-based step count after this update.
    """
    if t < 1:
        raise ValueError("step count t must be >= 1")
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    param = param - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return param, m, v


class Adam:
    """Tracks moments for a fixed list of parameter arrays, updated in place."""

    def __init__(self, params, cfg: AdamConfig):
        self.params = list(params)
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        for i, (p, g) in enumerate(zip(self.params, grads)):
            if g.shape != p.shape:
                raise ValueError("gradient shape does not match parameter shape")
            new_p, self.m[i], self.v[i] = adam_step(p, g, self.m[i], self.v[i], self.t, self.cfg)
            p[...] = new_p
