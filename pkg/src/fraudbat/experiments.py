"""Reusable experiment runs shared by the scripts and the acceptance suite."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .autoenc import AutoencoderSpec, DetectorConfig, fit_detector, score_dataset
from .batopt import BatConfig, run_bba, select_features
from .dataio import SplitSpec, apply_standardizer, fit_standardizer, load_csv, stratified_split
from .neural import TrainConfig
from .synthetic import gaussian_anomalies, signal_noise

REFERENCE_DROPPED = ["V28", "V27", "V26", "V25", "V24", "V23", "V22", "V20", "V15", "V13", "V8"]


def synthetic_detection_auc(seed: int, hidden=(6, 6)) -> float:
    """Test AUC of the default detector on 5000 Gaussian inliers + 50 far outliers."""
    d = gaussian_anomalies(n_inliers=5000, n_outliers=50, dim=10, min_sigma=6.0, seed=seed)
    train, test = stratified_split(d, SplitSpec(0.75, seed=seed))
    model = fit_detector(train, DetectorConfig(hidden_dims=list(hidden)), TrainConfig(seed=seed))
    _, report = score_dataset(model, test)
    return report.auc


def onemax_run(seed: int, dim: int = 16):
    return run_bba(lambda p: float(p.sum()), dim, BatConfig(n_bats=30, max_iter=50, seed=seed))


def signal_recovery(seed: int, bat: BatConfig | None = None) -> np.ndarray:
    """Selected mask on the 4-signal / 6-noise dataset."""
    d = signal_noise(seed=seed)
    train, val = stratified_split(d, SplitSpec(0.5, seed=seed))
    p = fit_standardizer(train)
    res = select_features(
        apply_standardizer(train, p),
        apply_standardizer(val, p),
        bat or BatConfig(n_bats=10, max_iter=10, seed=seed),
        AutoencoderSpec(d.n_features, [6, 6]),
        TrainConfig(batch_size=32, seed=seed),
    )
    return res.mask


@dataclass
class KaggleResult:
    baseline_auc: float
    selected_auc: float
    mask: list[int]
    dropped: list[str]
    timings: dict = field(default_factory=dict)


def kaggle_reproduction(path, seed: int = 0, bat: BatConfig | None = None, fitness_epochs: int = 10) -> KaggleResult:
    """Autoencoder on the Kaggle credit-card file, with and without bat selection.

    The Time column is dropped, leaving the 29 inputs of a 29-15-15-29 network.
    """
    t0 = time.perf_counter()
    d = load_csv(path).drop(["Time"])
    train, test = stratified_split(d, SplitSpec(0.75, seed=seed))
    det = DetectorConfig(hidden_dims=[15, 15], activation="tanh", standardize="zscore")
    tcfg = TrainConfig(learning_rate=0.01, epochs=60, batch_size=256, seed=seed)
    base = fit_detector(train, det, tcfg)
    _, base_report = score_dataset(base, test)
    t1 = time.perf_counter()

    fit_part, val_part = stratified_split(train, SplitSpec(0.75, seed=seed))
    p = fit_standardizer(fit_part)
    sel = select_features(
        apply_standardizer(fit_part, p),
        apply_standardizer(val_part, p),
        bat or BatConfig(n_bats=10, max_iter=10, seed=seed),
        AutoencoderSpec(d.n_features, [15, 15]),
        tcfg,
        fitness_epochs=fitness_epochs,
    )
    t2 = time.perf_counter()
    chosen = fit_detector(train, det, tcfg, mask=sel.mask)
    _, sel_report = score_dataset(chosen, test)
    return KaggleResult(
        baseline_auc=base_report.auc,
        selected_auc=sel_report.auc,
        mask=[int(m) for m in sel.mask],
        dropped=sel.dropped(),
        timings={"baseline": t1 - t0, "selection": t2 - t1, "final": time.perf_counter() - t2},
    )
