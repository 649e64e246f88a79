"""Supervised comparison models: logistic regression and a CART-style tree."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .neural import sigmoid


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    def to_dict(self) -> dict:
        return {"kind": "logistic", "weights": self.weights.tolist(), "bias": self.bias}


def log_loss(model: LogisticModel, x, y) -> float:
    p = sigmoid(np.asarray(x, float) @ model.weights + model.bias)
    eps = 1e-15
    p = np.clip(p, eps, 1 - eps)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def train_logistic(
    d: Dataset,
    lr: float = 0.1,
    epochs: int = 200,
    seed: int = 0,
    batch_size: int | None = None,
) -> LogisticModel:
    """Gradient descent on mean log-loss from a zero start.

    ``batch_size=None`` runs full-batch descent; otherwise each epoch visits
    seed-shuffled mini-batches.
    """
    if len(d) == 0:
        raise ValueError("cannot train on an empty dataset")
    if d.labels.min() == d.labels.max():
        raise ValueError("both classes must be present")
    x, y = d.features, d.labels.astype(float)
    w = np.zeros(d.n_features)
    b = 0.0
    rng = np.random.default_rng(seed)
    n = len(d)
    step = n if batch_size is None else batch_size
    for _ in range(epochs):
        order = np.arange(n) if batch_size is None else rng.permutation(n)
        for start in range(0, n, step):
            idx = order[start : start + step]
            err = sigmoid(x[idx] @ w + b) - y[idx]
            w = w - lr * (x[idx].T @ err) / idx.size
            b = b - lr * float(err.mean())
    return LogisticModel(w, b)


# -- decision tree -------------------------------------------------------------


@dataclass
class TreeNode:
    """Leaf when ``feature`` is None; otherwise rows with x[feature] <= threshold go left."""

    prob: float
    n: int
    impurity: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"prob": self.prob, "n": self.n, "impurity": self.impurity}
        return {
            "prob": self.prob,
            "n": self.n,
            "impurity": self.impurity,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeNode":
        node = cls(doc["prob"], doc["n"], doc["impurity"])
        if "feature" in doc:
            node.feature = doc["feature"]
            node.threshold = doc["threshold"]
            node.left = cls.from_dict(doc["left"])
            node.right = cls.from_dict(doc["right"])
        return node


def gini(p):
    p = np.asarray(p, dtype=float)
    return 2.0 * p * (1.0 - p)


def entropy(p):
    """Binary entropy in bits."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return np.nan_to_num(h, nan=0.0)


CRITERIA = {"gini": gini, "entropy": entropy}


def _best_split(x, y, impurity, min_leaf):
    """Lowest weighted child impurity; ties go to the lower feature, then threshold."""
    n = y.size
    best = None  # (score, feature, threshold)
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs, ys = x[order, j], y[order]
        cut = np.flatnonzero(xs[1:] != xs[:-1]) + 1  # left sizes at value boundaries
        cut = cut[(cut >= min_leaf) & (n - cut >= min_leaf)]
        if cut.size == 0:
            continue
        pos_left = np.cumsum(ys)[cut - 1]
        pos_total = ys.sum()
        n_left = cut.astype(float)
        n_right = n - n_left
        score = (
            n_left * impurity(pos_left / n_left) + n_right * impurity((pos_total - pos_left) / n_right)
        ) / n
        k = int(np.argmin(score))
        if best is None or score[k] < best[0] - 1e-12:
            best = (float(score[k]), j, float((xs[cut[k] - 1] + xs[cut[k]]) / 2.0))
    return best


def train_tree(
    d: Dataset,
    criterion: str = "gini",
    max_depth: int | None = 8,
    min_leaf: int = 1,
) -> TreeNode:
    """Greedy top-down tree. Splits on midpoints between consecutive distinct
    values and stops at ``max_depth``, ``min_leaf`` or a pure node.
    ``max_depth=None`` grows without a depth limit."""
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    if max_depth is not None and max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if len(d) == 0:
        raise ValueError("cannot train on an empty dataset")
    impurity = CRITERIA[criterion]
    x, y = d.features, d.labels.astype(float)

    def make(idx) -> TreeNode:
        p = float(y[idx].mean())
        return TreeNode(prob=p, n=int(idx.size), impurity=float(impurity(p)))

    root = make(np.arange(len(d)))
    stack = [(root, np.arange(len(d)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if node.impurity == 0.0 or (max_depth is not None and depth >= max_depth):
            continue
        if idx.size < 2 * min_leaf:
            continue
        split = _best_split(x[idx], y[idx], impurity, min_leaf)
        if split is None or split[0] > node.impurity:
            continue
        _, j, thr = split
        go_left = x[idx, j] <= thr
        node.feature, node.threshold = j, thr
        node.left, node.right = make(idx[go_left]), make(idx[~go_left])
        stack.append((node.right, idx[~go_left], depth + 1))
        stack.append((node.left, idx[go_left], depth + 1))
    return root


def _tree_proba(node: TreeNode, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0])
    stack = [(node, np.arange(x.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if nd.is_leaf:
            out[idx] = nd.prob
            continue
        left = x[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[left]))
        stack.append((nd.right, idx[~left]))
    return out


def _tree_n_features(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return max(node.feature + 1, _tree_n_features(node.left), _tree_n_features(node.right))


def predict_baseline(model, rows, n_features: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (scores, predictions) with ``predictions = scores > 0.5``.

    Trees do not record their input width; pass ``n_features`` to have it checked.
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2:
        raise ValueError("rows must be a 2-D matrix")
    if isinstance(model, LogisticModel):
        if x.shape[1] != model.weights.size:
            raise ValueError(f"expected {model.weights.size} columns, got {x.shape[1]}")
        scores = sigmoid(x @ model.weights + model.bias)
    elif isinstance(model, TreeNode):
        if n_features is not None and x.shape[1] != n_features:
            raise ValueError(f"expected {n_features} columns, got {x.shape[1]}")
        if x.shape[1] < _tree_n_features(model):
            raise ValueError("rows have fewer columns than the tree splits on")
        scores = _tree_proba(model, x)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return scores, (scores > 0.5).astype(np.int8)


def model_to_json(model) -> str:
    if isinstance(model, TreeNode):
        return json.dumps({"kind": "tree", "root": model.to_dict()})
    return json.dumps(model.to_dict())
