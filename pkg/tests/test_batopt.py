import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraudbat.autoenc import AutoencoderSpec
from fraudbat.batopt import (
    VELOCITY_LIMIT,
    Bat,
    BatConfig,
    FitnessError,
    SelectionResult,
    binarize_position,
    run_bba,
    select_features,
    update_frequency,
    update_loudness_pulse,
    update_velocity,
)
from fraudbat.dataio import SplitSpec, apply_standardizer, fit_standardizer, stratified_split
from fraudbat.neural import TrainConfig
from fraudbat.synthetic import signal_noise


def onemax(p):
    return float(p.sum())


def test_frequency_endpoints():
    cfg = BatConfig(f_min=0.0, f_max=2.0)
    assert update_frequency(cfg, 0.0) == 0.0
    assert update_frequency(cfg, 1.0) == 2.0
    assert update_frequency(cfg, 0.5) == 1.0
    with pytest.raises(ValueError):
        update_frequency(cfg, 1.5)


@given(st.floats(-5, 5), st.floats(0.01, 5), st.floats(0, 1), st.floats(0, 1))
def test_frequency_affine(f_min, width, b1, b2):
    cfg = BatConfig(f_min=f_min, f_max=f_min + width)
    mid = update_frequency(cfg, (b1 + b2) / 2)
    assert mid == pytest.approx((update_frequency(cfg, b1) + update_frequency(cfg, b2)) / 2, abs=1e-9)


def test_velocity_examples():
    v = np.array([0.3, -1.2, 2.0])
    x = np.array([1, 0, 1])
    assert np.array_equal(update_velocity(v, x, x, 1.7), v)
    assert update_velocity(np.zeros(2), [1, 0], [0, 0], 1.0).tolist() == [1.0, 0.0]
    with pytest.raises(ValueError):
        update_velocity(np.zeros(2), [1, 0, 1], [0, 0], 1.0)


@given(
    st.lists(st.tuples(st.floats(-10, 10), st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=20),
    st.floats(0, 10),
)
def test_velocity_clamped(rows, f):
    v, x, b = map(np.array, zip(*rows))
    assert np.all(np.abs(update_velocity(v, x, b, f)) <= VELOCITY_LIMIT)


def test_binarize_probability_half():
    rng = np.random.default_rng(0)
    bits = binarize_position(np.zeros(10_000), rng)
    assert abs(bits.mean() - 0.5) <= 0.02


def test_binarize_saturation_and_determinism():
    assert binarize_position(np.full(50, 30.0), np.random.default_rng(1)).all()
    assert not binarize_position(np.full(50, -30.0), np.random.default_rng(1)).any()
    v = np.random.default_rng(2).normal(size=40)
    a = binarize_position(v, np.random.default_rng(9))
    b = binarize_position(v, np.random.default_rng(9))
    assert np.array_equal(a, b) and set(a.tolist()) <= {0, 1}


def test_loudness_pulse_examples():
    cfg = BatConfig(alpha=0.9, r0=0.5, gamma=0.9)
    b = Bat(np.ones(3, dtype=np.int8), np.zeros(3), loudness=1.0)
    assert update_loudness_pulse(b, cfg, 1).loudness == pytest.approx(0.9)
    assert update_loudness_pulse(b, cfg, 0).pulse_rate == 0.0
    with pytest.raises(ValueError):
        update_loudness_pulse(b, cfg, -1)


def test_loudness_pulse_sequences():
    cfg = BatConfig()
    b = Bat(np.ones(3, dtype=np.int8), np.zeros(3), loudness=cfg.A0)
    loud, pulse = [], []
    for t in range(1, 40):
        b = update_loudness_pulse(b, cfg, t)
        loud.append(b.loudness)
        pulse.append(b.pulse_rate)
    assert all(a > c for a, c in zip(loud, loud[1:]))
    assert all(a <= c for a, c in zip(pulse, pulse[1:]))
    assert all(p <= cfg.r0 for p in pulse)
    assert pulse[-1] == pytest.approx(cfg.r0, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        BatConfig(f_min=2.0, f_max=1.0)
    with pytest.raises(ValueError):
        BatConfig(alpha=1.0)


def test_onemax_small():
    res = run_bba(onemax, 16, BatConfig(seed=0))
    assert res.best_fitness == 16
    assert res.best_position.tolist() == [1] * 16


def test_history_monotone_and_length():
    res = run_bba(onemax, 12, BatConfig(n_bats=8, max_iter=20, seed=3))
    assert len(res.history) == 21
    assert all(a <= b for a, b in zip(res.history, res.history[1:]))
    assert res.history[-1] == res.best_fitness


def test_zero_budget_returns_initial_best():
    cfg = BatConfig(n_bats=6, max_iter=0, seed=5)
    res = run_bba(onemax, 10, cfg)
    rng = np.random.default_rng(5)
    initial = [rng.integers(0, 2, size=10) for _ in range(6)]
    assert res.best_fitness == max(p.sum() for p in initial)
    assert res.n_evaluations == 6


def test_constant_fitness_terminates():
    res = run_bba(lambda p: 1.0, 7, BatConfig(n_bats=5, max_iter=10, seed=1))
    assert res.best_position.shape == (7,)
    assert set(res.best_position.tolist()) <= {0, 1}


def test_all_zero_position_gets_worst_score():
    seen = []

    def fit(p):
        seen.append(p.copy())
        return 1.0

    run_bba(fit, 1, BatConfig(n_bats=6, max_iter=5, seed=0))
    assert all(p.any() for p in seen)


def test_run_bba_deterministic():
    def fit(p):
        return float(np.sin(np.arange(p.size) + 1) @ p)

    a = run_bba(fit, 14, BatConfig(n_bats=10, max_iter=15, seed=8))
    b = run_bba(fit, 14, BatConfig(n_bats=10, max_iter=15, seed=8))
    assert np.array_equal(a.best_position, b.best_position) and a.history == b.history


def test_fitness_error_carries_context():
    def boom(p):
        raise RuntimeError("bad")

    with pytest.raises(FitnessError) as info:
        run_bba(boom, 4, BatConfig(n_bats=3, max_iter=2, seed=0))
    assert info.value.bat == 0 and info.value.iteration == 0


def test_initial_positions_seed_swarm():
    seen = []

    def fit(p):
        seen.append(p.copy())
        return float(p.sum())

    run_bba(fit, 5, BatConfig(n_bats=3, max_iter=0), initial_positions=[np.ones(5)])
    assert seen[0].tolist() == [1] * 5


def _signal_split(seed):
    d = signal_noise(seed=seed)
    train, val = stratified_split(d, SplitSpec(0.5, seed=seed))
    p = fit_standardizer(train)
    return apply_standardizer(train, p), apply_standardizer(val, p)


def test_select_features_finds_signal():
    train, val = _signal_split(0)
    res = select_features(
        train, val, BatConfig(n_bats=10, max_iter=10, seed=0), AutoencoderSpec(10, [6, 6]),
        TrainConfig(batch_size=32, seed=0),
    )
    assert isinstance(res, SelectionResult)
    assert res.mask[:4].sum() >= 3
    assert 0.5 < res.val_auc <= 1.0
    assert res.n_evaluations == 10 * 11
    doc = res.to_dict()
    assert doc["dropped_features"] == [n for n, m in zip(train.names, res.mask) if not m]
    assert len(doc["history"]) == 11


def test_select_features_all_ones_candidate(monkeypatch):
    import fraudbat.batopt as batopt

    captured = {}
    real = batopt.run_bba

    def spy(fitness, dim, cfg, initial_positions=()):
        captured["init"] = [np.asarray(p).tolist() for p in initial_positions]
        captured["all_ones_fitness"] = fitness(np.ones(dim, dtype=np.int8))
        return real(fitness, dim, cfg, initial_positions)

    monkeypatch.setattr(batopt, "run_bba", spy)
    train, val = _signal_split(1)
    res = select_features(
        train, val, BatConfig(n_bats=4, max_iter=0, seed=0), AutoencoderSpec(10, [6, 6]),
        TrainConfig(batch_size=32, seed=0), fitness_epochs=2,
    )
    assert captured["init"] == [[1] * 10]
    assert res.val_auc >= captured["all_ones_fitness"]
