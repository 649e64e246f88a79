"""Small fully connected network: forward pass, MSE loss, backprop, mini-batch SGD.

Weights follow the ``out_dim x in_dim`` convention, so a layer computes
``act(x @ W.T + b)`` on a row batch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "sigmoid", "identity")
FORMAT_VERSION = 1


def tanh(z):
    """(e^2z - 1) / (e^2z + 1), written with expm1 for accuracy near zero."""
    z = np.asarray(z, dtype=float)
    zc = np.clip(z, -20.0, 20.0)
    em = np.expm1(2.0 * zc)
    out = em / (em + 2.0)
    return np.where(np.abs(z) > 20.0, np.sign(z), out)


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(kind: str, z):
    if kind == "tanh":
        return tanh(z)
    if kind == "sigmoid":
        return sigmoid(z)
    return z


def _activation_grad(kind: str, a):
    # derivative expressed through the post-activation value
    if kind == "tanh":
        return 1.0 - a * a
    if kind == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(a)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "tanh"

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.in_dim}->{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class Network:
    layers: list[LayerSpec]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        _check_chain(self.layers)
        if len(self.weights) != len(self.layers) or len(self.biases) != len(self.layers):
            raise ValueError("need one weight matrix and one bias vector per layer")
        for spec, w, b in zip(self.layers, self.weights, self.biases):
            if w.shape != (spec.out_dim, spec.in_dim) or b.shape != (spec.out_dim,):
                raise ValueError(f"parameter shapes {w.shape}, {b.shape} do not match {spec}")

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "Network":
        return Network(list(self.layers), [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "layers": [
                {"in_dim": s.in_dim, "out_dim": s.out_dim, "activation": s.activation}
                for s in self.layers
            ],
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported network format version {doc.get('version')!r}")
        layers = [LayerSpec(**s) for s in doc["layers"]]
        weights = [np.asarray(w, dtype=float).reshape(s.out_dim, s.in_dim) for w, s in zip(doc["weights"], layers)]
        biases = [np.asarray(b, dtype=float).reshape(s.out_dim) for b, s in zip(doc["biases"], layers)]
        return cls(layers, weights, biases)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


def _check_chain(specs) -> None:
    if not specs:
        raise ValueError("network needs at least one layer")
    for a, b in zip(specs, specs[1:]):
        if a.out_dim != b.in_dim:
            raise ValueError(f"dimension chain broken: {a.out_dim} -> {b.in_dim}")


def init_network(specs: list[LayerSpec], seed: int = 0) -> Network:
    """Xavier-uniform weights, zero biases."""
    _check_chain(specs)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for s in specs:
        bound = math.sqrt(6.0 / (s.in_dim + s.out_dim))
        weights.append(rng.uniform(-bound, bound, size=(s.out_dim, s.in_dim)))
        biases.append(np.zeros(s.out_dim))
    return Network(list(specs), weights, biases)


@dataclass
class LayerCache:
    inputs: np.ndarray
    pre: np.ndarray
    post: np.ndarray


def forward(n: Network, x) -> tuple[np.ndarray, list[LayerCache]]:
    """Run ``x`` (one vector or a row batch) through the network.

    Returns the output and, per layer, its input, pre-activation and
    post-activation values.
    """
    a = np.asarray(x, dtype=float)
    if a.shape[-1] != n.in_dim or a.ndim not in (1, 2):
        raise ValueError(f"input shape {a.shape} incompatible with in_dim {n.in_dim}")
    cache = []
    for spec, w, b in zip(n.layers, n.weights, n.biases):
        z = a @ w.T + b
        h = _activate(spec.activation, z)
        cache.append(LayerCache(a, z, h))
        a = h
    return a, cache


def predict(n: Network, rows) -> np.ndarray:
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[1] != n.in_dim:
        raise ValueError(f"expected rows with {n.in_dim} columns, got shape {x.shape}")
    if x.shape[0] == 0:
        return np.empty((0, n.out_dim))
    return forward(n, x)[0]


def mse_loss(y, y_hat) -> float:
    """Mean squared error per component: ||y - y_hat||^2 / len(y)."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape:
        raise ValueError(f"shape mismatch {y.shape} vs {y_hat.shape}")
    if y.size == 0:
        raise ValueError("empty vectors")
    return float(np.mean((y - y_hat) ** 2))


def row_mse(y, y_hat) -> np.ndarray:
    return np.mean((np.asarray(y, float) - np.asarray(y_hat, float)) ** 2, axis=-1)


@dataclass
class Gradients:
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)


def backprop(n: Network, x, target) -> Gradients:
    """Exact gradients of the MSE loss w.r.t. every weight and bias.

    For a row batch the loss is averaged over rows, so the result is the mean
    of the per-row gradients.
    """
    t = np.asarray(target, dtype=float)
    out, cache = forward(n, x)
    if t.shape != out.shape:
        raise ValueError(f"target shape {t.shape} != output shape {out.shape}")
    single = out.ndim == 1
    if single:
        out, t = out[None, :], t[None, :]
    batch = out.shape[0]

    delta = 2.0 * (out - t) / (n.out_dim * batch)
    gw = [None] * len(n.layers)
    gb = [None] * len(n.layers)
    for i in range(len(n.layers) - 1, -1, -1):
        c = cache[i]
        post = c.post[None, :] if single else c.post
        inp = c.inputs[None, :] if single else c.inputs
        delta = delta * _activation_grad(n.layers[i].activation, post)
        gw[i] = delta.T @ inp
        gb[i] = delta.sum(axis=0)
        if i:
            delta = delta @ n.weights[i]
    return Gradients(gw, gb)


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 60
    batch_size: int = 256
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")


def train_sgd(n: Network, inputs, targets, cfg: TrainConfig = TrainConfig()) -> tuple[Network, list[float]]:
    """Plain mini-batch SGD. The input network is left untouched.

    The last partial batch is kept. ``loss_history[e]`` is the mean loss over
    all rows after epoch ``e``.
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training data must be a non-empty row matrix")
    if y.shape != (x.shape[0], n.out_dim) or x.shape[1] != n.in_dim:
        raise ValueError(f"data shapes {x.shape}, {y.shape} incompatible with network")

    net = n.copy()
    rng = np.random.default_rng(cfg.seed)
    history = []
    n_rows = x.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n_rows) if cfg.shuffle else np.arange(n_rows)
        for start in range(0, n_rows, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            g = backprop(net, x[idx], y[idx])
            for i in range(len(net.layers)):
                net.weights[i] -= cfg.learning_rate * g.weights[i]
                net.biases[i] -= cfg.learning_rate * g.biases[i]
        history.append(float(np.mean(row_mse(y, forward(net, x)[0]))))
    return net, history
