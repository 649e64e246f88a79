"""Binary bat algorithm and wrapper feature selection on top of it.

Fitness is maximized. Positions are bit vectors obtained from real velocities
through the sigmoid transfer function with stochastic rounding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autoenc import AutoencoderSpec, reconstruction_errors, train_autoencoder
from .metrics import roc_auc_score
from .neural import TrainConfig

VELOCITY_LIMIT = 6.0

FitnessFn = Callable[[np.ndarray], float]


class FitnessError(RuntimeError):
    def __init__(self, bat: int, iteration: int, cause: BaseException):
        super().__init__(f"fitness evaluation failed for bat {bat} at iteration {iteration}: {cause!r}")
        self.bat = bat
        self.iteration = iteration


@dataclass
class BatConfig:
    n_bats: int = 30
    f_min: float = 0.0
    f_max: float = 2.0
    alpha: float = 0.9
    gamma: float = 0.9
    r0: float = 0.5
    A0: float = 1.0
    max_iter: int = 50
    seed: int = 0
    p_flip: float | None = None  # None -> 1/dim

    def __post_init__(self):
        if self.n_bats < 1 or self.max_iter < 0:
            raise ValueError("n_bats must be >= 1 and max_iter >= 0")
        if not self.f_min < self.f_max:
            raise ValueError("f_min must be below f_max")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 <= self.r0 <= 1:
            raise ValueError("r0 must lie in [0, 1]")
        if self.A0 <= 0:
            raise ValueError("A0 must be positive")


@dataclass
class Bat:
    position: np.ndarray
    velocity: np.ndarray
    frequency: float = 0.0
    loudness: float = 1.0
    pulse_rate: float = 0.0
    fitness: float = -math.inf


def update_frequency(cfg: BatConfig, beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta={beta} outside [0, 1]")
    return cfg.f_min + (cfg.f_max - cfg.f_min) * beta


def update_velocity(v, x, x_best, f: float, limit: float = VELOCITY_LIMIT) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    x_best = np.asarray(x_best, dtype=float)
    if not v.shape == x.shape == x_best.shape:
        raise ValueError("velocity, position and best position must have equal length")
    return np.clip(v + (x - x_best) * f, -limit, limit)


def binarize_position(v, rng: np.random.Generator) -> np.ndarray:
    """Bit i is 1 with probability 1 / (1 + exp(-v_i))."""
    v = np.asarray(v, dtype=float)
    prob = 0.5 * (1.0 + np.tanh(0.5 * v))  # sigmoid without overflow
    return (rng.random(v.shape) < prob).astype(np.int8)


def update_loudness_pulse(b: Bat, cfg: BatConfig, t: int) -> Bat:
    if t < 0:
        raise ValueError("t must be non-negative")
    return Bat(
        position=b.position,
        velocity=b.velocity,
        frequency=b.frequency,
        loudness=cfg.alpha * b.loudness,
        pulse_rate=cfg.r0 * (1.0 - math.exp(-cfg.gamma * t)),
        fitness=b.fitness,
    )


@dataclass
class BbaResult:
    best_position: np.ndarray
    best_fitness: float
    history: list[float]
    n_evaluations: int

    def __iter__(self):
        return iter((self.best_position, self.best_fitness, self.history))


def run_bba(
    fitness: FitnessFn,
    dim: int,
    cfg: BatConfig = BatConfig(),
    initial_positions: Sequence[Sequence[int]] = (),
) -> BbaResult:
    """Maximize ``fitness`` over bit vectors of length ``dim``.

    ``initial_positions`` overrides the random start of the first bats.
    ``history[0]`` is the best fitness of the initial swarm and
    ``history[t]`` the global best after iteration ``t``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(cfg.seed)
    p_flip = cfg.p_flip if cfg.p_flip is not None else 1.0 / dim
    n_evals = 0

    def evaluate(pos: np.ndarray, bat: int, it: int) -> float:
        nonlocal n_evals
        n_evals += 1
        if not pos.any():
            return -math.inf
        try:
            return float(fitness(pos))
        except Exception as exc:
            raise FitnessError(bat, it, exc) from exc

    bats = []
    for i in range(cfg.n_bats):
        if i < len(initial_positions):
            pos = np.asarray(initial_positions[i], dtype=np.int8)
            if pos.shape != (dim,):
                raise ValueError(f"initial position {i} has wrong length")
        else:
            pos = rng.integers(0, 2, size=dim).astype(np.int8)
        bats.append(Bat(pos, np.zeros(dim), loudness=cfg.A0, pulse_rate=0.0))
    for i, b in enumerate(bats):
        b.fitness = evaluate(b.position, i, 0)

    best_i = int(np.argmax([b.fitness for b in bats]))
    best_pos, best_fit = bats[best_i].position.copy(), bats[best_i].fitness
    history = [best_fit]

    for t in range(1, cfg.max_iter + 1):
        for i, b in enumerate(bats):
            b.frequency = update_frequency(cfg, rng.random())
            b.velocity = update_velocity(b.velocity, b.position, best_pos, b.frequency)
            candidate = binarize_position(b.velocity, rng)
            if rng.random() > b.pulse_rate:
                flips = rng.random(dim) < p_flip
                candidate = np.where(flips, 1 - best_pos, best_pos).astype(np.int8)
            cand_fit = evaluate(candidate, i, t)
            if rng.random() < b.loudness and cand_fit > best_fit:
                b.position, b.fitness = candidate, cand_fit
                bats[i] = b = update_loudness_pulse(b, cfg, t)
        # rank: global best never regresses
        top = int(np.argmax([b.fitness for b in bats]))
        if bats[top].fitness > best_fit:
            best_pos, best_fit = bats[top].position.copy(), bats[top].fitness
        history.append(best_fit)

    return BbaResult(best_pos, best_fit, history, n_evals)


# -- wrapper feature selection ------------------------------------------------


@dataclass
class SelectionResult:
    mask: np.ndarray
    val_auc: float
    history: list[float]
    n_evaluations: int
    names: list[str] = field(default_factory=list)

    def dropped(self) -> list[str]:
        return [n for n, m in zip(self.names, self.mask) if not m]

    def to_dict(self) -> dict:
        return {
            "mask": [int(m) for m in self.mask],
            "val_auc": self.val_auc,
            "history": self.history,
            "dropped_features": self.dropped(),
            "n_evaluations": self.n_evaluations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def select_features(
    d_train,
    d_val,
    cfg: BatConfig,
    ae_cfg,
    train_cfg,
    fitness_epochs: int = 10,
) -> SelectionResult:
    """Pick the feature mask whose autoencoder scores the best validation AUC.

    Each candidate trains a fresh autoencoder for ``fitness_epochs`` on the
    masked training columns (inputs are expected to be standardized already).
    ``ae_cfg`` supplies hidden widths and activation; widths are capped below
    the number of selected features so the bottleneck stays narrower than the
    input. One bat starts at all-ones.
    """
    dim = d_train.n_features
    if d_val.n_features != dim:
        raise ValueError("train and validation feature counts differ")
    budget = TrainConfig(
        learning_rate=train_cfg.learning_rate,
        epochs=fitness_epochs,
        batch_size=train_cfg.batch_size,
        seed=train_cfg.seed,
        shuffle=train_cfg.shuffle,
    )
    cache: dict[bytes, float] = {}

    def fitness(mask: np.ndarray) -> float:
        key = mask.tobytes()
        if key not in cache:
            m = mask.astype(bool)
            spec = _capped_spec(int(m.sum()), ae_cfg)
            net, _ = train_autoencoder(d_train.features[:, m], spec, budget)
            err = reconstruction_errors(net, d_val.features[:, m])
            cache[key] = roc_auc_score(d_val.labels, err)
        return cache[key]

    res = run_bba(fitness, dim, cfg, initial_positions=[np.ones(dim, dtype=np.int8)])
    return SelectionResult(res.best_position, res.best_fitness, res.history, res.n_evaluations, list(d_train.names))


def _capped_spec(n_inputs: int, ae_cfg) -> AutoencoderSpec:
    cap = max(1, n_inputs - 1)
    hidden = [min(h, cap) for h in ae_cfg.hidden_dims]
    return AutoencoderSpec(n_inputs, hidden, ae_cfg.activation)
