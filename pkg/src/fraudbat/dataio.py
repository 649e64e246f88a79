"""CSV loading, standardization, stratified splitting and class rebalancing."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Malformed input file. ``row`` and ``col`` are 1-based data coordinates."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        if row is not None:
            loc = f"({row}, {col})" if col is not None else f"row {row}"
            message = f"{message} at {loc}"
        super().__init__(message)
        self.row = row
        self.col = col


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    names: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels).astype(np.int8)
        self.names = list(self.names)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        if len(self.names) != self.features.shape[1]:
            raise ValueError(
                f"{len(self.names)} names for {self.features.shape[1]} feature columns"
            )
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n_fraud = int(self.labels.sum())
        return len(self) - n_fraud, n_fraud

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.names)

    def select(self, mask) -> "Dataset":
        """Keep only the feature columns where ``mask`` is 1."""
        m = np.asarray(mask).astype(bool)
        if m.shape != (self.n_features,):
            raise ValueError(f"mask length {m.size} != feature count {self.n_features}")
        return Dataset(self.features[:, m], self.labels, [n for n, k in zip(self.names, m) if k])

    def drop(self, columns) -> "Dataset":
        missing = [c for c in columns if c not in self.names]
        if missing:
            raise ValueError(f"unknown columns: {missing}")
        return self.select([n not in columns for n in self.names])


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, has_header: bool | None = None, n_columns: int | None = None) -> Dataset:
    """Read a comma-separated file whose last column is the 0/1 class label.

    ``has_header=None`` detects a header from a non-numeric first row. Without a
    header, features are named ``x0, x1, ...``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")

    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DataFormatError(f"{path} is empty")

    if has_header is None:
        has_header = not all(_is_number(c) for c in rows[0])
    if has_header:
        header, rows = [c.strip().strip('"') for c in rows[0]], rows[1:]
    else:
        header = None

    width = n_columns or (len(header) if header else len(rows[0]) if rows else 0)
    if width < 2:
        raise DataFormatError("need at least one feature column and a label column")
    if header is not None and len(header) != width:
        raise DataFormatError(f"header has {len(header)} fields, expected {width}")

    values = np.empty((len(rows), width), dtype=float)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(f"expected {width} fields, found {len(row)}", row=i + 1)
        try:
            values[i] = [float(c) for c in row]
        except ValueError:
            for j, c in enumerate(row):
                if not _is_number(c):
                    raise DataFormatError(f"non-numeric cell {c!r}", row=i + 1, col=j + 1) from None

    labels = values[:, -1]
    bad = np.flatnonzero((labels != 0) & (labels != 1))
    if bad.size:
        raise DataFormatError(
            f"label {labels[bad[0]]!r} outside {{0, 1}}", row=int(bad[0]) + 1, col=width
        )
    names = header[:-1] if header else [f"x{j}" for j in range(width - 1)]
    return Dataset(values[:, :-1], labels.astype(np.int8), names)


def save_csv(d: Dataset, path, label_name: str = "Class") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*d.names, label_name])
        for x, y in zip(d.features.tolist(), d.labels.tolist()):
            writer.writerow([*(repr(v) for v in x), int(y)])


# -- standardization ---------------------------------------------------------


@dataclass
class StandardizerParams:
    """Per-column affine map ``x -> (x - loc) / scale``.

    For zscore ``loc``/``scale`` are mean and population std; for minmax they
    are the minimum and range. Degenerate scales are stored as 1.
    """

    method: str
    loc: np.ndarray
    scale: np.ndarray

    def __len__(self) -> int:
        return self.loc.size

    def subset(self, mask) -> "StandardizerParams":
        m = np.asarray(mask).astype(bool)
        return StandardizerParams(self.method, self.loc[m].copy(), self.scale[m].copy())

    def to_dict(self) -> dict:
        if self.method == "zscore":
            return {"method": "zscore", "mean": self.loc.tolist(), "std": self.scale.tolist()}
        return {
            "method": "minmax",
            "min": self.loc.tolist(),
            "max": (self.loc + self.scale).tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StandardizerParams":
        if doc["method"] == "zscore":
            return cls("zscore", np.asarray(doc["mean"], float), np.asarray(doc["std"], float))
        if doc["method"] == "minmax":
            lo = np.asarray(doc["min"], float)
            rng = np.asarray(doc["max"], float) - lo
            return cls("minmax", lo, np.where(rng == 0, 1.0, rng))
        raise ValueError(f"unknown standardization method {doc['method']!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fit_standardizer(d: Dataset, method: str = "zscore") -> StandardizerParams:
    x = d.features
    if x.shape[0] < 2:
        raise ValueError("need at least 2 rows to fit a standardizer")
    if method == "zscore":
        loc = x.mean(axis=0)
        scale = x.std(axis=0)  # population std (ddof=0)
    elif method == "minmax":
        loc = x.min(axis=0)
        scale = x.max(axis=0) - loc
    else:
        raise ValueError(f"unknown standardization method {method!r}")
    scale = np.where(scale == 0, 1.0, scale)
    return StandardizerParams(method, loc, scale)


def standardize_matrix(x: np.ndarray, p: StandardizerParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(p):
        raise ValueError(f"expected {len(p)} columns, got shape {x.shape}")
    return (x - p.loc) / p.scale


def apply_standardizer(d: Dataset, p: StandardizerParams) -> Dataset:
    return Dataset(standardize_matrix(d.features, p), d.labels.copy(), d.names)


def invert_standardizer(d: Dataset, p: StandardizerParams) -> Dataset:
    if d.n_features != len(p):
        raise ValueError(f"expected {len(p)} columns, got {d.n_features}")
    return Dataset(d.features * p.scale + p.loc, d.labels.copy(), d.names)


# -- splitting ---------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")


def _class_indices(labels: np.ndarray) -> list[np.ndarray]:
    groups = [np.flatnonzero(labels == c) for c in (0, 1)]
    if any(g.size == 0 for g in groups):
        raise ValueError("both classes must be present")
    return groups


def _allocate(counts: list[int], total: int) -> list[int]:
    """Split ``total`` across classes proportionally: floors first, then the
    remainder to the largest fractional parts (lower class label on ties)."""
    n = sum(counts)
    exact = [total * c / n for c in counts]
    alloc = [math.floor(e) for e in exact]
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - alloc[i]), i))
    for i in order[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def stratified_split(d: Dataset, s: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    """Partition ``d`` into train/test; rows keep their original relative order."""
    rng = np.random.default_rng(s.seed)
    n_train = math.floor(s.train_fraction * len(d))
    if s.stratified:
        groups = _class_indices(d.labels)
        alloc = _allocate([g.size for g in groups], n_train)
        train = np.concatenate([rng.permutation(g)[:k] for g, k in zip(groups, alloc)])
    else:
        train = rng.permutation(len(d))[:n_train]
    is_train = np.zeros(len(d), dtype=bool)
    is_train[train] = True
    return d.take(np.flatnonzero(is_train)), d.take(np.flatnonzero(~is_train))


def stratified_kfold_indices(labels, k: int, seed: int) -> list[np.ndarray]:
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    groups = _class_indices(labels)
    for c, g in enumerate(groups):
        if g.size < k:
            raise ValueError(f"class {c} has {g.size} members, fewer than k={k}")
    rng = np.random.default_rng(seed)
    dealt = np.concatenate([rng.permutation(g) for g in groups])
    fold_of = np.arange(dealt.size) % k
    return [np.sort(dealt[fold_of == f]) for f in range(k)]


def stratified_kfold(d: Dataset, k: int = 3, seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    folds = stratified_kfold_indices(d.labels, k, seed)
    out = []
    for val_idx in folds:
        is_val = np.zeros(len(d), dtype=bool)
        is_val[val_idx] = True
        out.append((d.take(np.flatnonzero(~is_val)), d.take(val_idx)))
    return out


# -- rebalancing -------------------------------------------------------------


def undersample(d: Dataset, seed: int = 0) -> Dataset:
    """Drop random majority rows until both classes have the minority count."""
    groups = _class_indices(d.labels)
    minority = int(np.argmin([g.size for g in groups]))
    keep_major = np.random.default_rng(seed).choice(
        groups[1 - minority], size=groups[minority].size, replace=False
    )
    return d.take(np.sort(np.concatenate([groups[minority], keep_major])))


def nearest_neighbors(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest other rows of ``x`` (Euclidean, ties to lower index)."""
    n, dim = x.shape
    out = np.empty((n, k), dtype=np.intp)
    chunk = max(1, (1 << 22) // max(1, n * dim))
    for start in range(0, n, chunk):
        block = x[start : start + chunk]
        d2 = ((block[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
        rows = np.arange(block.shape[0])
        d2[rows, start + rows] = np.inf
        out[start : start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def smote(d: Dataset, k_neighbors: int = 5, target_ratio: float = 1.0, seed: int = 0) -> Dataset:
    """Append synthetic minority rows until minority/majority reaches ``target_ratio``.

    Each synthetic row is ``x + u * (nn - x)`` for a random minority row ``x``,
    one of its ``k_neighbors`` nearest minority neighbours ``nn`` and
    ``u ~ U[0, 1]``. Original rows come first, synthetic rows after.
    """
    groups = _class_indices(d.labels)
    minority = int(np.argmin([g.size for g in groups]))
    minor_idx, major_idx = groups[minority], groups[1 - minority]
    if minor_idx.size <= k_neighbors:
        raise ValueError(
            f"minority class has {minor_idx.size} rows; need more than k_neighbors={k_neighbors}"
        )
    if target_ratio <= 0:
        raise ValueError("target_ratio must be positive")

    n_new = int(round(target_ratio * major_idx.size)) - minor_idx.size
    if n_new <= 0:
        return d.take(np.arange(len(d)))

    xm = d.features[minor_idx]
    nn = nearest_neighbors(xm, k_neighbors)
    rng = np.random.default_rng(seed)
    base = rng.integers(0, xm.shape[0], size=n_new)
    pick = nn[base, rng.integers(0, k_neighbors, size=n_new)]
    u = rng.random(n_new)[:, None]
    synth = xm[base] + u * (xm[pick] - xm[base])

    features = np.vstack([d.features, synth])
    labels = np.concatenate([d.labels, np.full(n_new, minority, dtype=np.int8)])
    return Dataset(features, labels, d.names)
