import json

import numpy as np
import pytest

from fraudbat.autoenc import (
    AnomalyModel,
    AutoencoderSpec,
    DetectorConfig,
    build_autoencoder,
    classify,
    fit_detector,
    fit_supervised_head,
    fit_threshold,
    head_scores,
    reconstruction_errors,
    score_dataset,
    train_autoencoder,
)
from fraudbat.dataio import Dataset, StandardizerParams, fit_standardizer, standardize_matrix
from fraudbat.metrics import confusion_matrix, summary_metrics
from fraudbat.neural import LayerSpec, Network, TrainConfig, predict
from fraudbat.synthetic import gaussian_anomalies


def identity_autoencoder(dim):
    return Network(
        [LayerSpec(dim, dim, "identity"), LayerSpec(dim, dim, "identity")],
        [np.eye(dim), np.eye(dim)],
        [np.zeros(dim), np.zeros(dim)],
    )


def test_build_mirror_chain():
    net = build_autoencoder(AutoencoderSpec(29, [15, 15]))
    assert [(s.in_dim, s.out_dim) for s in net.layers] == [(29, 15), (15, 15), (15, 29)]
    net = build_autoencoder(AutoencoderSpec(4, [2]))
    assert [(s.in_dim, s.out_dim) for s in net.layers] == [(4, 2), (2, 4)]


def test_build_output_identity():
    for act in ("tanh", "sigmoid"):
        net = build_autoencoder(AutoencoderSpec(6, [3], act))
        assert net.layers[-1].activation == "identity"
        assert net.layers[0].activation == act


def test_spec_validation():
    with pytest.raises(ValueError):
        AutoencoderSpec(0, [2])
    with pytest.raises(ValueError):
        AutoencoderSpec(5, [4, 2])
    with pytest.raises(ValueError):
        AutoencoderSpec(5, [])


def test_reconstruction_identity_zero():
    rows = np.random.default_rng(0).normal(size=(10, 3))
    assert np.all(reconstruction_errors(identity_autoencoder(3), rows) == 0.0)


def test_reconstruction_permutation_equivariant():
    rng = np.random.default_rng(1)
    net = build_autoencoder(AutoencoderSpec(5, [3]), seed=2)
    rows = rng.normal(size=(12, 5))
    perm = rng.permutation(12)
    e = reconstruction_errors(net, rows)
    assert np.allclose(reconstruction_errors(net, rows[perm]), e[perm])
    assert np.all(e >= 0)


def test_reconstruction_dimension_mismatch():
    with pytest.raises(ValueError):
        reconstruction_errors(build_autoencoder(AutoencoderSpec(5, [3])), np.zeros((2, 4)))


def test_outliers_reconstruct_worse():
    d = gaussian_anomalies(n_inliers=1000, n_outliers=20, seed=3)
    p = fit_standardizer(d)
    x = standardize_matrix(d.features, p)
    net, _ = train_autoencoder(x, AutoencoderSpec(10, [6, 6]), TrainConfig(epochs=20, seed=0))
    e = reconstruction_errors(net, x)
    assert e[d.labels == 1].mean() > e[d.labels == 0].mean()


def test_threshold_examples():
    assert fit_threshold([0.1, 0.2, 0.9], [0, 0, 1], "max_f1") == 0.2
    assert fit_threshold([0.1, 0.3, 5.0], [0, 0, 1], "quantile", q=1.0) == 0.3
    with pytest.raises(ValueError):
        fit_threshold([0.1, 0.2], [0, 0], "max_f1")


def brute_force_f1(errors, labels, t):
    pred = (np.asarray(errors) > t).astype(int)
    return summary_metrics(confusion_matrix(labels, pred))[3]


@pytest.mark.parametrize("seed", range(20))
def test_threshold_max_f1_is_optimal(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 40))
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    errors = np.round(rng.random(n) + labels * rng.random(), 1)
    t = fit_threshold(errors, labels)
    f1s = {c: brute_force_f1(errors, labels, c) for c in np.unique(errors)}
    best = max(f1s.values())
    assert f1s[t] == pytest.approx(best)
    assert t == min(c for c, v in f1s.items() if v == pytest.approx(best))


def small_model(threshold):
    net = build_autoencoder(AutoencoderSpec(3, [2]), seed=0)
    std = StandardizerParams("zscore", np.zeros(3), np.ones(3))
    return AnomalyModel(net, std, threshold, [1, 0, 1, 1])


def test_classify_extremes():
    rows = np.random.default_rng(0).normal(size=(15, 4))
    assert not classify(small_model(1e12), rows).any()
    assert classify(small_model(-1.0), rows).all()


def test_classify_monotone_in_threshold():
    rows = np.random.default_rng(1).normal(size=(50, 4))
    prev = classify(small_model(0.0), rows)
    for t in np.linspace(0.0, 3.0, 13)[1:]:
        cur = classify(small_model(t), rows)
        assert np.all(cur <= prev)
        prev = cur


def test_classify_matches_manual_pipeline():
    d = gaussian_anomalies(n_inliers=300, n_outliers=10, dim=6, seed=2)
    mask = np.array([1, 1, 0, 1, 1, 0])
    model = fit_detector(d, DetectorConfig(hidden_dims=[3]), TrainConfig(epochs=3), mask=mask)
    sel = d.features[:, mask.astype(bool)]
    z = (sel - model.standardizer.loc) / model.standardizer.scale
    recon = predict(model.network, z)
    manual = (np.mean((z - recon) ** 2, axis=1) > model.threshold).astype(np.int8)
    assert np.array_equal(classify(model, d.features), manual)
    with pytest.raises(ValueError):
        classify(model, d.features[:, :5])


def test_score_dataset_perfect_separation():
    # a zero-output network makes the error the squared row norm
    zero = Network([LayerSpec(2, 2, "identity")], [np.zeros((2, 2))], [np.zeros(2)])
    model = AnomalyModel(zero, StandardizerParams("zscore", np.zeros(2), np.ones(2)), 0.5, [1, 1])
    x =np.array([[0.1, 0.0], [0.2, 0.1], [3.0, 3.0], [4.0, 2.0]])
    d = Dataset(x, [0, 0, 1, 1], ["a", "b"])
    errors, report = score_dataset(model, d)
    assert report.auc == 1.0
    assert report.confusion.total == 4
    assert np.all(errors >= 0)
    with pytest.raises(ValueError):
        score_dataset(model, Dataset(x, [1, 1, 1, 1], ["a", "b"]))


def test_training_ignores_labels():
    d = gaussian_anomalies(n_inliers=200, n_outliers=5, dim=4, seed=0)
    cfg = TrainConfig(epochs=3, seed=1)
    spec = AutoencoderSpec(4, [2])
    a, _ = train_autoencoder(d.features, spec, cfg)
    flipped = Dataset(d.features, 1 - d.labels, d.names)
    b, _ = train_autoencoder(flipped.features, spec, cfg)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))


def test_fit_detector_deterministic_and_serializable():
    d = gaussian_anomalies(n_inliers=400, n_outliers=12, dim=5, seed=4)
    cfg = DetectorConfig(hidden_dims=[3])
    a = fit_detector(d, cfg, TrainConfig(epochs=5, seed=7))
    b = fit_detector(d, cfg, TrainConfig(epochs=5, seed=7))
    assert np.array_equal(a.errors(d.features), b.errors(d.features))
    back = AnomalyModel.from_dict(json.loads(json.dumps(a.to_dict())))
    assert np.array_equal(back.errors(d.features), a.errors(d.features))
    assert back.threshold == a.threshold and back.config_hash == a.config_hash


def test_fit_detector_legit_only_option():
    d = gaussian_anomalies(n_inliers=400, n_outliers=12, dim=5, seed=4)
    a = fit_detector(d, DetectorConfig(hidden_dims=[3]), TrainConfig(epochs=5))
    b = fit_detector(d, DetectorConfig(hidden_dims=[3], legit_only=True), TrainConfig(epochs=5))
    assert not np.array_equal(a.network.weights[0], b.network.weights[0])


def test_model_consistency_checks():
    net = build_autoencoder(AutoencoderSpec(3, [2]))
    std = StandardizerParams("zscore", np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        AnomalyModel(net, std, 0.1, [1, 1, 0, 0])
    with pytest.raises(ValueError):
        AnomalyModel(net, std, float("inf"), [1, 1, 1])


def test_supervised_head_runs():
    d = gaussian_anomalies(n_inliers=300, n_outliers=30, dim=6, seed=5)
    model = fit_detector(d, DetectorConfig(hidden_dims=[3]), TrainConfig(epochs=5))
    head = fit_supervised_head(model, d, hidden=4, train_cfg=TrainConfig(epochs=5))
    assert [(s.in_dim, s.out_dim) for s in head.layers] == [(3, 4), (4, 2)]
    assert head_scores(model, head, d.features).shape == (len(d),)
