"""Autoencoder anomaly detector scored by reconstruction error."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics
from .dataio import Dataset, SplitSpec, StandardizerParams, fit_standardizer, standardize_matrix, stratified_split
from .neural import LayerSpec, Network, TrainConfig, init_network, predict, row_mse, train_sgd


@dataclass
class AutoencoderSpec:
    """``hidden_dims`` lists every hidden width in order and must read the same
    reversed, so ``[15, 15]`` on 29 inputs gives 29 -> 15 -> 15 -> 29."""

    input_dim: int
    hidden_dims: list[int] = field(default_factory=lambda: [15, 15])
    activation: str = "tanh"

    def __post_init__(self):
        self.hidden_dims = list(self.hidden_dims)
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if not self.hidden_dims or min(self.hidden_dims) < 1:
            raise ValueError("hidden_dims must be a non-empty list of positive widths")
        if self.hidden_dims != self.hidden_dims[::-1]:
            raise ValueError(f"hidden_dims {self.hidden_dims} is not mirror-symmetric")
        if self.activation not in ("tanh", "sigmoid"):
            raise ValueError(f"unsupported activation {self.activation!r}")

    def layer_dims(self) -> list[int]:
        return [self.input_dim, *self.hidden_dims, self.input_dim]


def build_autoencoder(spec: AutoencoderSpec, seed: int = 0) -> Network:
    dims = spec.layer_dims()
    acts = [spec.activation] * (len(dims) - 2) + ["identity"]
    layers = [LayerSpec(a, b, act) for a, b, act in zip(dims, dims[1:], acts)]
    return init_network(layers, seed)


def train_autoencoder(rows, spec: AutoencoderSpec, cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Fit the autoencoder to reproduce ``rows``. Takes only the feature matrix."""
    x = np.asarray(rows, dtype=float)
    net = build_autoencoder(spec, seed=cfg.seed)
    return train_sgd(net, x, x, cfg)


def reconstruction_errors(n: Network, rows) -> np.ndarray:
    """Per-row mean squared reconstruction error."""
    x = np.asarray(rows, dtype=float)
    if n.in_dim != n.out_dim:
        raise ValueError("network is not an autoencoder (in_dim != out_dim)")
    return row_mse(x, predict(n, x))


def fit_threshold(errors_val, labels_val, strategy: str = "max_f1", q: float = 0.99) -> float:
    """Pick the cut for ``error > threshold -> fraud``.

    ``max_f1`` searches every distinct validation error and keeps the lowest
    threshold reaching the best F1. ``quantile`` takes the q-quantile of the
    legit-class errors.
    """
    e = np.asarray(errors_val, dtype=float)
    y = np.asarray(labels_val).astype(np.int8)
    if e.shape != y.shape or e.size == 0:
        raise ValueError("errors and labels must be equal-length, non-empty vectors")
    if strategy == "quantile":
        legit = e[y == 0]
        if legit.size == 0:
            raise ValueError("quantile threshold needs legit-class errors")
        return float(np.quantile(legit, q))
    if strategy != "max_f1":
        raise ValueError(f"unknown threshold strategy {strategy!r}")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise ValueError("max_f1 threshold needs both classes in the validation set")

    cand = np.unique(e)
    order = np.argsort(e, kind="stable")
    e_sorted, y_sorted = e[order], y[order]
    # rows with error > cand[j] are those from searchsorted(..., side="right") on
    above = e.size - np.searchsorted(e_sorted, cand, side="right")
    pos_cum = np.concatenate(([0], np.cumsum(y_sorted)))
    tp = n_pos - pos_cum[e.size - above]
    fp = above - tp
    fn = n_pos - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)
    return float(cand[int(np.argmax(f1))])


@dataclass
class AnomalyModel:
    network: Network
    standardizer: StandardizerParams
    threshold: float
    feature_mask: np.ndarray
    config_hash: str = ""
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.feature_mask = np.asarray(self.feature_mask).astype(np.int8)
        n_sel = int(self.feature_mask.sum())
        if self.network.in_dim != n_sel or len(self.standardizer) != n_sel:
            raise ValueError(
                f"mask selects {n_sel} features; network takes {self.network.in_dim}, "
                f"standardizer covers {len(self.standardizer)}"
            )
        if not np.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    def transform(self, rows) -> np.ndarray:
        x = np.asarray(rows, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.feature_mask.size:
            raise ValueError(f"expected {self.feature_mask.size} columns, got shape {x.shape}")
        return standardize_matrix(x[:, self.feature_mask.astype(bool)], self.standardizer)

    def errors(self, rows) -> np.ndarray:
        return reconstruction_errors(self.network, self.transform(rows))

    def to_dict(self) -> dict:
        return {
            "network": self.network.to_dict(),
            "standardizer": self.standardizer.to_dict(),
            "threshold": self.threshold,
            "feature_mask": self.feature_mask.tolist(),
            "names": list(self.names),
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AnomalyModel":
        return cls(
            network=Network.from_dict(doc["network"]),
            standardizer=StandardizerParams.from_dict(doc["standardizer"]),
            threshold=float(doc["threshold"]),
            feature_mask=np.asarray(doc["feature_mask"]),
            config_hash=doc.get("config_hash", ""),
            names=doc.get("names", []),
        )


def classify(model: AnomalyModel, rows) -> np.ndarray:
    return (model.errors(rows) > model.threshold).astype(np.int8)


def score_dataset(model: AnomalyModel, d: Dataset) -> tuple[np.ndarray, metrics.EvalReport]:
    errors = model.errors(d.features)
    return errors, metrics.evaluate(d.labels, errors, model.threshold)


@dataclass
class DetectorConfig:
    hidden_dims: list[int] = field(default_factory=lambda: [15, 15])
    activation: str = "tanh"
    standardize: str = "zscore"
    threshold_strategy: str = "max_f1"
    threshold_quantile: float = 0.99
    validation_fraction: float = 0.1
    legit_only: bool = False

    def hash(self, train: TrainConfig) -> str:
        doc = json.dumps({"detector": asdict(self), "train": asdict(train)}, sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()[:16]


def fit_detector(
    train: Dataset,
    cfg: DetectorConfig = DetectorConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    mask=None,
) -> AnomalyModel:
    """Standardize, train the autoencoder unsupervised, then fit the threshold.

    A stratified validation slice is held out of autoencoder training for the
    threshold. Labels reach training only when ``legit_only`` filters rows.
    """
    mask = np.ones(train.n_features, dtype=np.int8) if mask is None else np.asarray(mask, dtype=np.int8)
    if not mask.any():
        raise ValueError("feature mask selects no columns")
    d = train.select(mask)
    fit_part, val_part = stratified_split(
        d, SplitSpec(train_fraction=1.0 - cfg.validation_fraction, seed=train_cfg.seed)
    )
    std = fit_standardizer(fit_part, cfg.standardize)
    rows = fit_part.features
    if cfg.legit_only:
        rows = rows[fit_part.labels == 0]
    spec = AutoencoderSpec(d.n_features, cfg.hidden_dims, cfg.activation)
    net, _ = train_autoencoder(standardize_matrix(rows, std), spec, train_cfg)
    val_err = reconstruction_errors(net, standardize_matrix(val_part.features, std))
    threshold = fit_threshold(val_err, val_part.labels, cfg.threshold_strategy, cfg.threshold_quantile)
    return AnomalyModel(net, std, threshold, mask, cfg.hash(train_cfg), list(train.names))


# -- optional supervised head -------------------------------------------------


def encoder_part(n: Network) -> Network:
    """Layers up to and including the narrowest one."""
    widths = [s.out_dim for s in n.layers[:-1]]
    k = int(np.argmin(widths)) + 1 if widths else 1
    return Network(n.layers[:k], n.weights[:k], n.biases[:k])


def fit_supervised_head(
    model: AnomalyModel, d: Dataset, hidden: int = 4, train_cfg: TrainConfig = TrainConfig()
) -> Network:
    """Train an encoder -> hidden -> 2 head on one-hot labels with MSE; the
    encoder stays frozen."""
    codes = predict(encoder_part(model.network), model.transform(d.features))
    targets = np.eye(2)[d.labels]
    act = model.network.layers[0].activation
    head = init_network(
        [LayerSpec(codes.shape[1], hidden, act), LayerSpec(hidden, 2, "identity")], train_cfg.seed
    )
    head, _ = train_sgd(head, codes, targets, train_cfg)
    return head


def head_scores(model: AnomalyModel, head: Network, rows) -> np.ndarray:
    out = predict(head, predict(encoder_part(model.network), model.transform(rows)))
    return out[:, 1] - out[:, 0]
