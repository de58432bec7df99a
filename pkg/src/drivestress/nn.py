"""A small fully-connected network with hand-written backprop.

float64 throughout. ReLU hidden layers, identity output. He-normal
weight init with zero biases. The optimizer is Adam-style with bias
correction, a global gradient-norm clip, and a skip-and-count guard
against non-finite gradients.

Checkpoints are a versioned binary format: magic, a JSON header with
layer sizes, init seed and step counter, then the flat little-endian
float64 parameter array (weights row-major, then bias, per layer).
Round-trips are bit exact.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IntegrityError

_MAGIC = b"DSN1"
_CKPT_VERSION = 1


class Mlp:
    def __init__(self, sizes, seed: int):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) < 2 or any(s <= 0 for s in sizes):
            raise ConfigError(f"bad layer sizes: {sizes!r}")
        self.sizes = sizes
        self.seed = int(seed)
        rng = np.random.default_rng(np.random.SeedSequence([7, self.seed & 0xFFFFFFFF]))
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            std = math.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, std, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)


def param_count(net: Mlp) -> int:
    return sum(w.size + b.size for w, b in zip(net.weights, net.biases))


def clone(net: Mlp) -> Mlp:
    twin = Mlp.__new__(Mlp)
    twin.sizes = net.sizes
    twin.seed = net.seed
    twin.weights = [w.copy() for w in net.weights]
    twin.biases = [b.copy() for b in net.biases]
    return twin


def forward(net: Mlp, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    a = x[None, :] if single else x
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        a = a @ w.T + b
        if i != last:
            np.maximum(a, 0.0, out=a)
    return a[0] if single else a


def forward_cached(net: Mlp, x: np.ndarray):
    """Batched forward keeping the layer activations for backprop."""
    a = np.asarray(x, dtype=float)
    acts = [a]  # activation entering each layer
    pre = []  # pre-activation of each layer
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        pre.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return a, (acts, pre)


def backward(net: Mlp, x, gout) -> list:
    """Gradient of sum(forward(net, x) * gout) w.r.t. every parameter.

    Returns [(dW, db), ...] per layer. x: (B, n_in), gout: (B, n_out).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    gout = np.atleast_2d(np.asarray(gout, dtype=float))
    _, (acts, pre) = forward_cached(net, x)
    grads = [None] * net.n_layers
    delta = gout
    for i in range(net.n_layers - 1, -1, -1):
        grads[i] = (delta.T @ acts[i], delta.sum(axis=0))
        if i > 0:
            delta = (delta @ net.weights[i]) * (pre[i - 1] > 0.0)
    return grads


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 10.0
    step: int = 0
    skipped: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 1e-3, clip_norm: float = 10.0) -> "AdamState":
        opt = cls(lr=lr, clip_norm=clip_norm)
        opt.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        opt.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        return opt


def clip_gradients(grads: list, max_norm: float) -> list:
    total = math.sqrt(sum(float((dw**2).sum() + (db**2).sum()) for dw, db in grads))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return [(dw * scale, db * scale) for dw, db in grads]


def apply_update(net: Mlp, opt: AdamState, grads: list):
    """One optimizer step. Non-finite gradients skip the update and
    increment opt.skipped instead of poisoning the parameters."""
    for dw, db in grads:
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            opt.skipped += 1
            return
    grads = clip_gradients(grads, opt.clip_norm)
    opt.step += 1
    t = opt.step
    b1c = 1.0 - opt.beta1**t
    b2c = 1.0 - opt.beta2**t
    for i, (dw, db) in enumerate(grads):
        mw, mb = opt.m[i]
        vw, vb = opt.v[i]
        mw *= opt.beta1
        mw += (1.0 - opt.beta1) * dw
        mb *= opt.beta1
        mb += (1.0 - opt.beta1) * db
        vw *= opt.beta2
        vw += (1.0 - opt.beta2) * dw**2
        vb *= opt.beta2
        vb += (1.0 - opt.beta2) * db**2
        net.weights[i] -= opt.lr * (mw / b1c) / (np.sqrt(vw / b2c) + opt.eps)
        net.biases[i] -= opt.lr * (mb / b1c) / (np.sqrt(vb / b2c) + opt.eps)


# ---------------------------------------------------------------------------
# checkpoints


def _flat_params(net: Mlp) -> np.ndarray:
    chunks = []
    for w, b in zip(net.weights, net.biases):
        chunks.append(w.ravel())
        chunks.append(b.ravel())
    return np.concatenate(chunks)


def save_checkpoint(path, net: Mlp, step: int = 0, extra: dict | None = None):
    header = {
        "version": _CKPT_VERSION,
        "sizes": list(net.sizes),
        "seed": net.seed,
        "step": int(step),
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    params = np.ascontiguousarray(_flat_params(net), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(params.tobytes())


def load_checkpoint(path):
    """Returns (net, header dict). Raises IntegrityError on any
    mismatch between the header and the stored parameters."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != _MAGIC:
        raise IntegrityError(f"not a checkpoint file: {path}")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + hlen:
        raise IntegrityError(f"checkpoint header truncated: {path}")
    try:
        header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"checkpoint header unreadable: {path}") from exc
    if header.get("version") != _CKPT_VERSION:
        raise IntegrityError(f"unsupported checkpoint version {header.get('version')!r}")
    sizes = tuple(header["sizes"])
    net = Mlp.__new__(Mlp)
    net.sizes = sizes
    net.seed = int(header.get("seed", 0))
    expected = sum((i + 1) * o for i, o in zip(sizes[:-1], sizes[1:]))
    body = raw[8 + hlen :]
    if len(body) != expected * 8:
        raise IntegrityError(
            f"checkpoint parameter block is {len(body)} bytes, expected {expected * 8}"
        )
    flat = np.frombuffer(body, dtype="<f8").astype(np.float64)
    net.weights, net.biases = [], []
    pos = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        net.weights.append(flat[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in).copy())
        pos += fan_out * fan_in
        net.biases.append(flat[pos : pos + fan_out].copy())
        pos += fan_out
    return net, header
