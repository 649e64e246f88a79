"""Synthetic datasets for offline runs and tests."""

from __future__ import annotations

import numpy as np

from .dataio import Dataset


def gaussian_anomalies(
    n_inliers: int = 5000,
    n_outliers: int = 50,
    dim: int = 10,
    min_sigma: float = 6.0,
    max_sigma: float = 8.0,
    seed: int = 0,
) -> Dataset:
    """Inliers: standard Gaussian latents through a random linear map.

    Outliers use the same map on latents placed along random directions at
    radius ``U[min_sigma, max_sigma]``, i.e. at least ``min_sigma`` standard
    deviations out in Mahalanobis distance. Rows are shuffled.
    """
    rng = np.random.default_rng(seed)
    mix = rng.normal(size=(dim, dim)) / np.sqrt(dim)
    z_in = rng.normal(size=(n_inliers, dim))
    dirs = rng.normal(size=(n_outliers, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    z_out = dirs * rng.uniform(min_sigma, max_sigma, size=(n_outliers, 1))
    x = np.vstack([z_in, z_out]) @ mix.T
    y = np.concatenate([np.zeros(n_inliers), np.ones(n_outliers)]).astype(np.int8)
    order = rng.permutation(y.size)
    return Dataset(x[order], y[order], [f"x{j}" for j in range(dim)])


def signal_noise(
    n_legit: int = 1000,
    n_fraud: int = 100,
    n_signal: int = 4,
    n_noise: int = 6,
    shift: float = 2.0,
    seed: int = 0,
) -> Dataset:
    """Fraud rows differ from legit rows only on the first ``n_signal`` columns.

    Signal columns of fraud rows sit ``shift`` standard deviations away, with a
    random sign per row and column; noise columns share one distribution.
    """
    rng = np.random.default_rng(seed)
    dim = n_signal + n_noise
    legit = rng.normal(size=(n_legit, dim))
    fraud = rng.normal(size=(n_fraud, dim))
    signs = rng.choice([-1.0, 1.0], size=(n_fraud, n_signal))
    fraud[:, :n_signal] = signs * (shift + 0.5 * np.abs(fraud[:, :n_signal]))
    x = np.vstack([legit, fraud])
    y = np.concatenate([np.zeros(n_legit), np.ones(n_fraud)]).astype(np.int8)
    order = rng.permutation(y.size)
    names = [f"s{j}" for j in range(n_signal)] + [f"n{j}" for j in range(n_noise)]
    return Dataset(x[order], y[order], names)
