"""Confusion matrix, summary metrics, ROC curve and AUC.

Fraud (label 1) is the positive class throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class RocCurve:
    """ROC points ordered by decreasing threshold.

    ``thresholds[i]`` is the score cut producing ``(fpr[i], tpr[i])``: a sample
    is positive when its score is >= the threshold. The first point is the
    (0, 0) origin with threshold +inf.
    """

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["fpr", "tpr"])
            for f, t in zip(self.fpr.tolist(), self.tpr.tolist()):
                writer.writerow([repr(f), repr(t)])


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    roc: RocCurve = field(repr=False)
    threshold: float | None = None

    def to_dict(self) -> dict:
        thresholds = [t if math.isfinite(t) else None for t in self.roc.thresholds.tolist()]
        return {
            "confusion": asdict(self.confusion),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "threshold": self.threshold,
            "roc": {
                "fpr": self.roc.fpr.tolist(),
                "tpr": self.roc.tpr.tolist(),
                "thresholds": thresholds,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        roc = doc["roc"]
        thresholds = [math.inf if t is None else t for t in roc["thresholds"]]
        return cls(
            confusion=ConfusionMatrix(**doc["confusion"]),
            accuracy=doc["accuracy"],
            precision=doc["precision"],
            recall=doc["recall"],
            f1=doc["f1"],
            auc=doc["auc"],
            roc=RocCurve(
                np.asarray(roc["fpr"], dtype=float),
                np.asarray(roc["tpr"], dtype=float),
                np.asarray(thresholds, dtype=float),
            ),
            threshold=doc.get("threshold"),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EvalReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _as_binary(v, name: str) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int8)


def confusion_matrix(labels, predictions) -> ConfusionMatrix:
    y = _as_binary(labels, "labels")
    p = _as_binary(predictions, "predictions")
    if y.shape != p.shape:
        raise ValueError(f"length mismatch: {y.size} labels vs {p.size} predictions")
    if y.size == 0:
        raise ValueError("cannot build a confusion matrix from empty input")
    tp = int(np.sum((y == 1) & (p == 1)))
    fp = int(np.sum((y == 0) & (p == 1)))
    tn = int(np.sum((y == 0) & (p == 0)))
    fn = int(np.sum((y == 1) & (p == 0)))
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def summary_metrics(m: ConfusionMatrix) -> tuple[float, float, float, float]:
    """Return (accuracy, precision, recall, f1).

    Zero denominators yield 0 rather than NaN.
    """
    if m.total <= 0:
        raise ValueError("confusion matrix is empty")
    accuracy = (m.tp + m.tn) / m.total
    precision = m.tp / (m.tp + m.fp) if m.tp + m.fp else 0.0
    recall = m.tp / (m.tp + m.fn) if m.tp + m.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return accuracy, precision, recall, f1


def roc_curve(labels, scores) -> RocCurve:
    y = _as_binary(labels, "labels")
    s = np.asarray(scores, dtype=float)
    if s.shape != y.shape:
        raise ValueError(f"length mismatch: {y.size} labels vs {s.size} scores")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC curve needs both classes present")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each run of equal scores, so ties move together
    ends = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.append(ends, s.size - 1)
    tps = np.cumsum(y_sorted)[ends]
    fps = (ends + 1) - tps
    fpr = np.concatenate(([0.0], fps / n_neg))
    tpr = np.concatenate(([0.0], tps / n_pos))
    thresholds = np.concatenate(([np.inf], s_sorted[ends]))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds)


def auc(curve: RocCurve) -> float:
    x, y = curve.fpr, curve.tpr
    area = float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))
    return min(1.0, max(0.0, area))


def roc_auc_score(labels, scores) -> float:
    return auc(roc_curve(labels, scores))


def evaluate(labels, scores, threshold: float) -> EvalReport:
    """Full report: ROC from raw scores, confusion matrix from ``score > threshold``."""
    s = np.asarray(scores, dtype=float)
    predictions = (s > threshold).astype(np.int8)
    return evaluate_predictions(labels, s, predictions, threshold=threshold)


def evaluate_predictions(labels, scores, predictions, threshold: float | None = None) -> EvalReport:
    cm = confusion_matrix(labels, predictions)
    accuracy, precision, recall, f1 = summary_metrics(cm)
    curve = roc_curve(labels, scores)
    return EvalReport(
        confusion=cm,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=auc(curve),
        roc=curve,
        threshold=None if threshold is None else float(threshold),
    )


def confusion_table(m: ConfusionMatrix) -> str:
    """Aligned 2x2 table, real classes as rows and predicted classes as columns."""
    rows = [
        ["", "pred 0", "pred 1", "total"],
        ["real 0", str(m.tn), str(m.fp), str(m.tn + m.fp)],
        ["real 1", str(m.fn), str(m.tp), str(m.fn + m.tp)],
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, directory) -> dict[str, Path]:
    """Write report.json, roc.csv and confusion.txt into ``directory``."""
    import json

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.json",
        "roc": out / "roc.csv",
        "confusion": out / "confusion.txt",
    }
    paths["report"].write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    report.roc.to_csv(paths["roc"])
    paths["confusion"].write_text(confusion_table(report.confusion))
    return paths
