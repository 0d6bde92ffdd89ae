"""Minimal dense-network engine on numpy: sequential MLPs with hand-written
backward passes, Adam, finite-difference gradient checking, and a compact
binary checkpoint format.

Parameters train in float32; gradient checks run the same code in float64.
"""

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ShapeError

ACTIVATIONS = ("none", "relu", "sigmoid")
_ACT_CODE = {name: i for i, name in enumerate(ACTIVATIONS)}

_MAGIC = b"RNLF"
_VERSION = 1


@dataclass
class DenseLayer:
    weight: np.ndarray  # (fan_out, fan_in)
    bias: np.ndarray    # (fan_out,)
    activation: str = "none"

    def __post_init__(self):
        if self.activation not in _ACT_CODE:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError("dense layer weight/bias shapes disagree")


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 8192
    lr: float = 3e-4
    lr_decay: float = 0.995  # multiplied in at each epoch boundary
    seed: int = 0


def init_mlp(sizes, activations, rng, dtype=np.float32):
    """Stack of dense layers; sizes has one more entry than activations.

    relu layers draw weights with variance 2/fan_in, everything else with
    variance 2/(fan_in + fan_out). Biases start at zero.
    """
    if len(sizes) != len(activations) + 1:
        raise ShapeError("need len(sizes) == len(activations) + 1")
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        if act == "relu":
            std = np.sqrt(2.0 / fan_in)
        else:
            std = np.sqrt(2.0 / (fan_in + fan_out))
        w = rng.normal(0.0, std, size=(fan_out, fan_in)).astype(dtype)
        b = np.zeros(fan_out, dtype=dtype)
        layers.append(DenseLayer(w, b, act))
    return layers


def _activate(z, act):
    if act == "relu":
        return np.maximum(z, 0.0)
    if act == "sigmoid":
        return expit(z)
    return z


def _activation_grad(y, act):
    """d activation / d preactivation, written in terms of the output y."""
    if act == "relu":
        return (y > 0.0).astype(y.dtype)
    if act == "sigmoid":
        return y * (1.0 - y)
    return np.ones_like(y)


def mlp_forward(layers, x):
    """Returns (output, cache); cache feeds mlp_backward."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError("mlp input must be (batch, features)")
    cache = []
    for layer in layers:
        y = _activate(x @ layer.weight.T + layer.bias, layer.activation)
        cache.append((x, y))
        x = y
    return x, cache


def mlp_apply(layers, x):
    y, _ = mlp_forward(layers, x)
    return y


def mlp_backward(layers, cache, grad_out):
    """Backpropagate grad_out (batch, fan_out of last layer).

    Returns (grads, grad_in) where grads is a list of (dW, db) matching the
    layer list and grad_in is the gradient with respect to the network input.
    """
    grads = [None] * len(layers)
    g = np.asarray(grad_out)
    flush = g.dtype == np.float32
    for i in range(len(layers) - 1, -1, -1):
        x, y = cache[i]
        gz = g * _activation_grad(y, layers[i].activation)
        if flush:
            # saturated sigmoid outputs shrink gradients multiplicatively
            # layer over layer; once they reach the subnormal float32 range
            # the matmuls fall off the fast FPU path and training crawls
            gz[np.abs(gz) < 1e-15] = 0.0
        grads[i] = (gz.T @ x, gz.sum(axis=0))
        g = gz @ layers[i].weight
    return grads, g


def mlp_param_list(layers):
    """Flat [W0, b0, W1, b1, ...] views for optimizer updates."""
    out = []
    for layer in layers:
        out.append(layer.weight)
        out.append(layer.bias)
    return out


def grad_list(grads):
    """Flatten mlp_backward output to match mlp_param_list ordering."""
    out = []
    for gw, gb in grads:
        out.append(gw)
        out.append(gb)
    return out


def cast_layers(layers, dtype):
    return [DenseLayer(l.weight.astype(dtype), l.bias.astype(dtype),
                       l.activation) for l in layers]


@dataclass
class AdamState:
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    @classmethod
    def for_params(cls, params):
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params], t=0)


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One in-place Adam update with bias correction."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("params/grads/state lengths disagree")
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = g.astype(p.dtype, copy=False)
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def grad_check(loss_fn, params, analytic, rng, n_coords=40, h=1e-4,
               floor=1e-6):
    """Max relative error between analytic gradients and central differences.

    loss_fn() must evaluate the scalar loss at the current parameter values;
    params are mutated in place and restored. Coordinates are subsampled;
    entries whose finite difference is below `floor` are skipped. Run this
    with float64 parameters.
    """
    worst = 0.0
    checked = 0
    for _ in range(n_coords):
        pi = int(rng.integers(len(params)))
        p = params[pi]
        idx = tuple(int(rng.integers(s)) for s in p.shape)
        orig = p[idx]
        p[idx] = orig + h
        up = loss_fn()
        p[idx] = orig - h
        down = loss_fn()
        p[idx] = orig
        fd = (up - down) / (2.0 * h)
        if abs(fd) < floor:
            continue
        rel = abs(analytic[pi][idx] - fd) / abs(fd)
        worst = max(worst, rel)
        checked += 1
    if checked == 0:
        raise ValueError("no checkable coordinates; loss may be flat")
    return worst


def save_mlp(path, layers, adam=None):
    """Serialize layers (and optionally Adam state) to the binary format.

    Layout, all little-endian: magic 'RNLF', uint32 version, uint32 layer
    count, per-layer (uint32 fan_in, uint32 fan_out, uint8 activation code),
    float32 payload W then b per layer, uint8 Adam flag, and when set a
    uint64 step count followed by float32 first/second moments in parameter
    order.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(layers)))
        for layer in layers:
            fan_out, fan_in = layer.weight.shape
            fh.write(struct.pack("<IIB", fan_in, fan_out,
                                 _ACT_CODE[layer.activation]))
        for layer in layers:
            fh.write(np.ascontiguousarray(layer.weight,
                                          dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(layer.bias, dtype="<f4").tobytes())
        if adam is None:
            fh.write(struct.pack("<B", 0))
        else:
            fh.write(struct.pack("<BQ", 1, adam.t))
            for arr in list(adam.m) + list(adam.v):
                fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_mlp(path):
    """Inverse of save_mlp. Returns (layers, AdamState or None)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    version, n_layers = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    off = 12
    shapes = []
    for _ in range(n_layers):
        fan_in, fan_out, code = struct.unpack_from("<IIB", data, off)
        off += 9
        if code >= len(ACTIVATIONS):
            raise ValueError(f"{path}: unknown activation code {code}")
        shapes.append((fan_in, fan_out, ACTIVATIONS[code]))

    def take(count):
        nonlocal off
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=off).copy()
        off += 4 * count
        return arr

    layers = []
    for fan_in, fan_out, act in shapes:
        w = take(fan_in * fan_out).reshape(fan_out, fan_in)
        b = take(fan_out)
        layers.append(DenseLayer(w, b, act))
    (flag,) = struct.unpack_from("<B", data, off)
    off += 1
    adam = None
    if flag:
        (t,) = struct.unpack_from("<Q", data, off)
        off += 8
        moments = []
        for fan_in, fan_out, _ in shapes * 2:
            moments.append(take(fan_in * fan_out).reshape(fan_out, fan_in))
            moments.append(take(fan_out))
        half = len(moments) // 2
        adam = AdamState(m=moments[:half], v=moments[half:], t=t)
    if off != len(data):
        raise ValueError(f"{path}: trailing bytes ({len(data) - off})")
    return layers, adam
