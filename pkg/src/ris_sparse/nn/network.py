"""Layer containers and checkpoint serialization.

A network is an ordered list of layers executed front to back. Residual
blocks wrap a sub-list and add its output to its input, so a block whose
parameters are all zero is an exact identity.

Checkpoints are a single binary file: an 8-byte little-endian length,
a JSON header describing the layer stack, then float64 little-endian
parameter blocks in layer order.
"""

import json
import struct

import numpy as np

from .layers import (Conv2D, Dense, Dropout, Flatten, Layer, LeakyReLU,
                     ReLU, Softmax)

CHECKPOINT_VERSION = 1


class Residual(Layer):
    """y = x + body(x); the body is a list of layers run in order."""

    def __init__(self, body):
        super().__init__()
        self.body = list(body)

    def forward(self, x, train=False, rng=None):
        out = x
        for layer in self.body:
            out = layer.forward(out, train=train, rng=rng)
        if out.shape != x.shape:
            raise ValueError("residual body must preserve shape")
        return x + out

    def backward(self, dy):
        dx = dy
        for layer in reversed(self.body):
            dx = layer.backward(dx)
        return dy + dx

    def zero_grads(self):
        for layer in self.body:
            layer.zero_grads()

    def spec(self):
        return {"kind": "residual", "body": [layer.spec() for layer in self.body]}


class Network:
    """Plain sequential stack with parameter bookkeeping."""

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x, train=False, rng=None):
        out = x
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        return out

    def backward(self, dy):
        dx = dy
        for layer in reversed(self.layers):
            dx = layer.backward(dx)
        return dx

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def _walk(self):
        stack = list(reversed(self.layers))
        while stack:
            layer = stack.pop()
            yield layer
            if isinstance(layer, Residual):
                stack.extend(reversed(layer.body))

    def param_items(self):
        """(path, array) pairs in a stable depth-first order."""
        items = []
        for i, layer in enumerate(self._walk()):
            for name in sorted(layer.params):
                items.append((f"{i}.{name}", layer.params[name]))
        return items

    def param_arrays(self):
        return [arr for _, arr in self.param_items()]

    def grad_arrays(self):
        grads = []
        for layer in self._walk():
            for name in sorted(layer.params):
                grads.append(layer.grads[name])
        return grads

    def n_params(self):
        return sum(arr.size for arr in self.param_arrays())

    def conv_layers(self):
        return [l for l in self._walk() if isinstance(l, Conv2D)]

    def dropout_layers(self):
        return [l for l in self._walk() if isinstance(l, Dropout)]

    def freeze_dropout(self, frozen=True):
        for layer in self.dropout_layers():
            layer.frozen = frozen
            if not frozen:
                layer._frozen_mask = None

    def spec(self):
        return {"layers": [layer.spec() for layer in self.layers]}


def layer_from_spec(d):
    kind = d["kind"]
    if kind == "conv2d":
        return Conv2D(d["in_channels"], d["out_channels"], kernel=tuple(d["kernel"]),
                      pad=d["pad"], stride=d["stride"])
    if kind == "dense":
        return Dense(d["n_in"], d["n_out"])
    if kind == "relu":
        return ReLU()
    if kind == "leaky_relu":
        return LeakyReLU(d["alpha"])
    if kind == "softmax":
        return Softmax()
    if kind == "dropout":
        return Dropout(d["p"])
    if kind == "flatten":
        return Flatten()
    if kind == "residual":
        return Residual([layer_from_spec(b) for b in d["body"]])
    raise ValueError(f"unknown layer kind {kind!r}")


def network_from_spec(spec):
    return Network([layer_from_spec(d) for d in spec["layers"]])


def save_checkpoint(path, network, extra=None):
    items = network.param_items()
    header = {
        "format_version": CHECKPOINT_VERSION,
        "dtype": "<f8",
        "network": network.spec(),
        "params": [{"path": p, "shape": list(a.shape)} for p, a in items],
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for _, arr in items:
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Rebuild the network and return (network, header)."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 8:
        raise ValueError("checkpoint file is truncated")
    (hlen,) = struct.unpack("<Q", raw[:8])
    header = json.loads(raw[8:8 + hlen].decode("utf-8"))
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header.get('format_version')!r}")
    net = network_from_spec(header["network"])
    offset = 8 + hlen
    for rec, (path_key, arr) in zip(header["params"], net.param_items()):
        if rec["path"] != path_key or tuple(rec["shape"]) != arr.shape:
            raise ValueError("checkpoint parameter table does not match the layer stack")
        n = arr.size * 8
        block = np.frombuffer(raw[offset:offset + n], dtype="<f8").reshape(arr.shape)
        arr[...] = block
        offset += n
    if offset != len(raw):
        raise ValueError("checkpoint has trailing or missing parameter bytes")
    return net, header
