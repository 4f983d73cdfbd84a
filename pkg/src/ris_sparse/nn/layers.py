"""NumPy layers with hand-written forward/backward passes.

Inputs are batched: conv layers take (B, H, W, C), dense layers (B, F).
Each layer caches what its backward pass needs on forward; parameter
gradients accumulate into ``grads`` and ``backward`` returns the input
gradient.
"""

import numpy as np


def glorot_uniform(shape, fan_in, fan_out, rng, dtype=np.float64):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Base layer: stateless unless it declares parameters."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def zero_grads(self):
        for name, p in self.params.items():
            self.grads[name] = np.zeros_like(p)

    def spec(self) -> dict:
        raise NotImplementedError


class Conv2D(Layer):
    """2D cross-correlation with zero padding, kernels shaped (kh, kw, c_in, c_out)."""

    def __init__(self, in_channels, out_channels, kernel=3, pad=1, stride=1,
                 rng=None, dtype=np.float64):
        super().__init__()
        kh, kw = (kernel, kernel) if np.isscalar(kernel) else kernel
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kernel = (int(kh), int(kw))
        self.pad = int(pad)
        self.stride = int(stride)
        fan_in = kh * kw * in_channels
        fan_out = kh * kw * out_channels
        if rng is None:
            w = np.zeros((kh, kw, in_channels, out_channels), dtype=dtype)
        else:
            w = glorot_uniform((kh, kw, in_channels, out_channels), fan_in, fan_out, rng, dtype)
        self.params = {"w": w, "b": np.zeros(out_channels, dtype=dtype)}
        self.zero_grads()

    def _out_hw(self, h, w):
        kh, kw = self.kernel
        num_h = h + 2 * self.pad - kh
        num_w = w + 2 * self.pad - kw
        if num_h < 0 or num_w < 0 or num_h % self.stride or num_w % self.stride:
            raise ValueError(
                f"conv geometry mismatch: input {h}x{w}, kernel {kh}x{kw}, "
                f"pad {self.pad}, stride {self.stride}"
            )
        return num_h // self.stride + 1, num_w // self.stride + 1

    def forward(self, x, train=False, rng=None):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ValueError(f"expected (B, H, W, {self.in_channels}) input, got {x.shape}")
        b, h, w, _ = x.shape
        oh, ow = self._out_hw(h, w)
        kh, kw = self.kernel
        s = self.stride
        p = self.pad
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        out = np.broadcast_to(self.params["b"], (b, oh, ow, self.out_channels)).copy()
        for u in range(kh):
            for v in range(kw):
                patch = xp[:, u:u + s * oh:s, v:v + s * ow:s, :]
                out += patch @ self.params["w"][u, v]
        self._cache = (xp, x.shape, (oh, ow))
        return out

    def backward(self, dy):
        xp, x_shape, (oh, ow) = self._cache
        kh, kw = self.kernel
        s = self.stride
        p = self.pad
        self.grads["b"] += dy.sum(axis=(0, 1, 2))
        dxp = np.zeros_like(xp)
        for u in range(kh):
            for v in range(kw):
                patch = xp[:, u:u + s * oh:s, v:v + s * ow:s, :]
                self.grads["w"][u, v] += np.tensordot(patch, dy, axes=([0, 1, 2], [0, 1, 2]))
                dxp[:, u:u + s * oh:s, v:v + s * ow:s, :] += dy @ self.params["w"][u, v].T
        _, h, w, _ = x_shape
        return dxp[:, p:p + h, p:p + w, :] if p else dxp

    def spec(self):
        return {
            "kind": "conv2d",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": list(self.kernel),
            "pad": self.pad,
            "stride": self.stride,
        }


class Dense(Layer):
    def __init__(self, n_in, n_out, rng=None, dtype=np.float64):
        super().__init__()
        self.n_in = int(n_in)
        self.n_out = int(n_out)
        if rng is None:
            w = np.zeros((n_in, n_out), dtype=dtype)
        else:
            w = glorot_uniform((n_in, n_out), n_in, n_out, rng, dtype)
        self.params = {"w": w, "b": np.zeros(n_out, dtype=dtype)}
        self.zero_grads()

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"expected (B, {self.n_in}) input, got {x.shape}")
        self._cache = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, dy):
        x = self._cache
        self.grads["w"] += x.T @ dy
        self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["w"].T

    def spec(self):
        return {"kind": "dense", "n_in": self.n_in, "n_out": self.n_out}


class ReLU(Layer):
    def forward(self, x, train=False, rng=None):
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, dy):
        return np.where(self._cache, dy, 0.0)

    def spec(self):
        return {"kind": "relu"}


class LeakyReLU(Layer):
    def __init__(self, alpha=0.2):
        super().__init__()
        self.alpha = float(alpha)

    def forward(self, x, train=False, rng=None):
        self._cache = x > 0
        return np.where(self._cache, x, self.alpha * x)

    def backward(self, dy):
        return np.where(self._cache, dy, self.alpha * dy)

    def spec(self):
        return {"kind": "leaky_relu", "alpha": self.alpha}


class Softmax(Layer):
    """Row-wise softmax over the last axis, stabilized by max subtraction."""

    def forward(self, x, train=False, rng=None):
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=-1, keepdims=True)
        self._cache = y
        return y

    def backward(self, dy):
        y = self._cache
        return y * (dy - (dy * y).sum(axis=-1, keepdims=True))

    def spec(self):
        return {"kind": "softmax"}


class Dropout(Layer):
    """Inverted dropout: kept activations are scaled by 1/(1-p) in training.

    Setting ``frozen = True`` pins the mask drawn on the next training
    forward, which keeps the map deterministic for finite differences.
    """

    def __init__(self, p):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValueError("dropout probability must lie in [0, 1)")
        self.p = float(p)
        self.frozen = False
        self._frozen_mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.p == 0.0:
            self._cache = None
            return x
        if self.frozen and self._frozen_mask is not None:
            mask = self._frozen_mask
            if mask.shape != x.shape:
                raise ValueError("frozen dropout mask does not match input shape")
        else:
            if rng is None:
                raise ValueError("dropout in training mode needs an rng")
            mask = rng.random(x.shape) >= self.p
            if self.frozen:
                self._frozen_mask = mask
        self._cache = mask
        return x * mask / (1.0 - self.p)

    def backward(self, dy):
        if self._cache is None:
            return dy
        return dy * self._cache / (1.0 - self.p)

    def spec(self):
        return {"kind": "dropout", "p": self.p}


class Flatten(Layer):
    def forward(self, x, train=False, rng=None):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._cache)

    def spec(self):
        return {"kind": "flatten"}
