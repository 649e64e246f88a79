"""Command-line driver: ``fraudbat <command> [flags]``.

Every run writes its artifacts plus a ``manifest.json`` into the output
directory. Failures print one line ``error: <category>: <message>`` on stderr
and exit non-zero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, metrics
from .autoenc import AnomalyModel, AutoencoderSpec, fit_detector, fit_supervised_head, head_scores, score_dataset
from .baselines import model_to_json, predict_baseline, train_logistic, train_tree
from .batopt import FitnessError, select_features
from .config import SAMPLING_MODES, ConfigError, PipelineConfig
from .dataio import (
    DataFormatError,
    Dataset,
    SplitSpec,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
    load_csv,
    save_csv,
    smote,
    stratified_kfold,
    stratified_split,
    undersample,
)
from .metrics import EvalReport
from .synthetic import gaussian_anomalies, signal_noise

log = logging.getLogger("fraudbat")

COMMANDS = ("train-ae", "select-features", "evaluate", "compare", "kfold")
EXIT_CODES = {"config": 2, "data": 3, "io": 4, "model": 5, "internal": 1}

SCHEMA_HINT = (
    "expected a comma-separated file, optional header row, numeric feature columns "
    "and a final 0/1 class column; generate one with `fraudbat gen-synthetic --out data.csv`"
)


class RunError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit_report(report: EvalReport, directory) -> dict[str, Path]:
    """Write report.json, roc.csv and confusion.txt."""
    return metrics.write_report(report, directory)


# -- data preparation -----------------------------------------------------------


def load_data(cfg: PipelineConfig) -> Dataset:
    if not cfg.data:
        raise RunError("config", f"no data path given; {SCHEMA_HINT}")
    try:
        d = load_csv(cfg.data, has_header=cfg.has_header)
    except FileNotFoundError as exc:
        raise RunError("data", f"{exc}; {SCHEMA_HINT}") from exc
    except DataFormatError as exc:
        raise RunError("data", str(exc)) from exc
    if cfg.drop_columns:
        try:
            d = d.drop(cfg.drop_columns)
        except ValueError as exc:
            raise RunError("config", str(exc)) from exc
    return d


def split(cfg: PipelineConfig, d: Dataset) -> tuple[Dataset, Dataset]:
    try:
        return stratified_split(d, SplitSpec(cfg.train_fraction, True, cfg.seed))
    except ValueError as exc:
        raise RunError("data", str(exc)) from exc


def resample(cfg: PipelineConfig, d: Dataset) -> Dataset:
    """Rebalance training rows. SMOTE neighbours are found on standardized
    features; the affine map is undone afterwards so rows stay in raw units."""
    mode = cfg.sampling.mode
    try:
        if mode == "under":
            return undersample(d, cfg.seed)
        if mode == "smote":
            p = fit_standardizer(d, cfg.standardize)
            z = smote(apply_standardizer(d, p), cfg.sampling.smote_k, cfg.sampling.smote_ratio, cfg.seed)
            return invert_standardizer(z, p)
    except ValueError as exc:
        raise RunError("data", f"{mode} sampling failed: {exc}") from exc
    return d


def _train_detector(cfg: PipelineConfig, train: Dataset, mask=None, train_cfg=None) -> AnomalyModel:
    try:
        model = fit_detector(train, cfg.detector, train_cfg or cfg.train, mask=mask)
    except ValueError as exc:
        raise RunError("model", str(exc)) from exc
    model.config_hash = cfg.hash()
    return model


def _report_summary(r: EvalReport) -> dict:
    return {
        "accuracy": r.accuracy,
        "precision": r.precision,
        "recall": r.recall,
        "f1": r.f1,
        "auc": r.auc,
        "confusion": {"tp": r.confusion.tp, "fp": r.confusion.fp, "tn": r.confusion.tn, "fn": r.confusion.fn},
    }


def _score_baseline(name: str, cfg: PipelineConfig, train: Dataset, test: Dataset):
    b = cfg.baselines
    if name == "logistic":
        model = train_logistic(train, lr=b.logistic_lr, epochs=b.logistic_epochs, seed=cfg.seed)
    else:
        criterion = name.split("_", 1)[1]
        model = train_tree(train, criterion, max_depth=b.tree_max_depth, min_leaf=b.tree_min_leaf)
    scores, preds = predict_baseline(model, test.features)
    return model, metrics.evaluate_predictions(test.labels, scores, preds, threshold=0.5)


# -- commands ---------------------------------------------------------------------


def cmd_train_ae(cfg: PipelineConfig, out: Path, info: dict) -> None:
    d = load_data(cfg)
    train, test = split(cfg, d)
    train = resample(cfg, train)
    t0 = time.perf_counter()
    model = _train_detector(cfg, train, mask=cfg.mask)
    info["timings"]["train"] = time.perf_counter() - t0
    _, report = score_dataset(model, test)
    _finish_model_run(cfg, model, report, test, out, info)
    if cfg.fc_head:
        head = fit_supervised_head(model, train, cfg.fc_hidden, cfg.train)
        scores = head_scores(model, head, test.features)
        head_report = metrics.evaluate(test.labels, scores, 0.0)
        emit_report(head_report, out / "fc_head")
        (out / "fc_head" / "head.json").write_text(head.to_json())
        info["artifacts"].append("fc_head/report.json")


def _finish_model_run(cfg, model: AnomalyModel, report: EvalReport, test: Dataset, out: Path, info: dict) -> None:
    (out / "model.json").write_text(_dump(model.to_dict()))
    emit_report(report, out)
    info["feature_mask"] = model.feature_mask.tolist()
    info["dropped_features"] = [n for n, m in zip(model.names, model.feature_mask) if not m]
    info["artifacts"] += ["model.json", "report.json", "roc.csv", "confusion.txt"]
    log.info("test AUC %.4f over %d rows", report.auc, len(test))


def cmd_select_features(cfg: PipelineConfig, out: Path, info: dict) -> None:
    d = load_data(cfg)
    train, test = split(cfg, d)
    train = resample(cfg, train)
    try:
        fit_part, val_part = stratified_split(train, SplitSpec(1.0 - cfg.selection_fraction, True, cfg.seed))
    except ValueError as exc:
        raise RunError("data", str(exc)) from exc
    p = fit_standardizer(fit_part, cfg.standardize)
    ae = AutoencoderSpec(train.n_features, cfg.detector.hidden_dims, cfg.detector.activation)
    t0 = time.perf_counter()
    try:
        sel = select_features(
            apply_standardizer(fit_part, p),
            apply_standardizer(val_part, p),
            cfg.bat,
            ae,
            cfg.train,
            fitness_epochs=cfg.fitness_epochs,
        )
    except (FitnessError, ValueError) as exc:
        raise RunError("model", str(exc)) from exc
    info["timings"]["selection"] = time.perf_counter() - t0
    (out / "selection.json").write_text(sel.to_json() + "\n")
    info["artifacts"].append("selection.json")
    info["selection_evaluations"] = sel.n_evaluations

    t0 = time.perf_counter()
    model = _train_detector(cfg, train, mask=sel.mask)
    info["timings"]["train"] = time.perf_counter() - t0
    _, report = score_dataset(model, test)
    _finish_model_run(cfg, model, report, test, out, info)


def cmd_evaluate(cfg: PipelineConfig, out: Path, info: dict, model_path: Path | None = None) -> None:
    path = model_path or out / "model.json"
    try:
        model = AnomalyModel.from_dict(json.loads(Path(path).read_text()))
    except FileNotFoundError:
        raise RunError("io", f"no model bundle at {path}; run train-ae or select-features first") from None
    except (KeyError, ValueError) as exc:
        raise RunError("model", f"bad model bundle {path}: {exc}") from exc
    d = load_data(cfg)
    _, test = split(cfg, d)
    try:
        _, report = score_dataset(model, test)
    except ValueError as exc:
        raise RunError("model", str(exc)) from exc
    emit_report(report, out)
    info["model"] = str(path)
    info["feature_mask"] = model.feature_mask.tolist()
    info["dropped_features"] = [n for n, m in zip(model.names, model.feature_mask) if not m]
    info["artifacts"] += ["report.json", "roc.csv", "confusion.txt"]


def cmd_compare(cfg: PipelineConfig, out: Path, info: dict) -> None:
    d = load_data(cfg)
    train, test = split(cfg, d)
    train = resample(cfg, train)
    summary = {}

    model = _train_detector(cfg, train, mask=cfg.mask)
    _, report = score_dataset(model, test)
    emit_report(report, out / "autoencoder")
    summary["autoencoder"] = _report_summary(report)

    p = fit_standardizer(train, cfg.standardize)
    ztrain, ztest = apply_standardizer(train, p), apply_standardizer(test, p)
    for name in cfg.baselines.models:
        t0 = time.perf_counter()
        try:
            bmodel, report = _score_baseline(name, cfg, ztrain, ztest)
        except ValueError as exc:
            raise RunError("model", f"{name}: {exc}") from exc
        info["timings"][name] = time.perf_counter() - t0
        emit_report(report, out / name)
        (out / name / "model.json").write_text(model_to_json(bmodel) + "\n")
        summary[name] = _report_summary(report)

    (out / "report.json").write_text(_dump({"models": summary}))
    info["artifacts"] += ["report.json"] + [f"{m}/report.json" for m in summary]


def cmd_kfold(cfg: PipelineConfig, out: Path, info: dict) -> None:
    d = load_data(cfg)
    try:
        folds = stratified_kfold(d, cfg.kfold, cfg.seed)
    except ValueError as exc:
        raise RunError("data", str(exc)) from exc
    per_fold = []
    for k, (train, val) in enumerate(folds):
        train = resample(cfg, train)
        row = {}
        model = _train_detector(cfg, train, mask=cfg.mask)
        _, report = score_dataset(model, val)
        row["autoencoder"] = _report_summary(report)
        p = fit_standardizer(train, cfg.standardize)
        ztrain, zval = apply_standardizer(train, p), apply_standardizer(val, p)
        for name in cfg.baselines.models:
            try:
                _, report = _score_baseline(name, cfg, ztrain, zval)
            except ValueError as exc:
                raise RunError("model", f"{name} fold {k}: {exc}") from exc
            row[name] = _report_summary(report)
        per_fold.append(row)

    mean = {
        name: {m: float(np.mean([f[name][m] for f in per_fold])) for m in ("accuracy", "precision", "recall", "f1", "auc")}
        for name in per_fold[0]
    }
    best = {name: int(np.argmax([f[name]["auc"] for f in per_fold])) for name in per_fold[0]}
    (out / "report.json").write_text(_dump({"k": cfg.kfold, "folds": per_fold, "mean": mean, "best_fold": best}))
    info["artifacts"].append("report.json")


def run_experiment(cfg: PipelineConfig, which: str, model_path: Path | None = None) -> int:
    """Run one command; raises RunError on failure."""
    if which not in COMMANDS:
        raise RunError("config", f"unknown command {which!r}")
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RunError("io", f"cannot create output directory {out}: {exc}") from exc
    info = {"artifacts": [], "timings": {}}
    t0 = time.perf_counter()
    handler = {
        "train-ae": cmd_train_ae,
        "select-features": cmd_select_features,
        "evaluate": lambda c, o, i: cmd_evaluate(c, o, i, model_path),
        "compare": cmd_compare,
        "kfold": cmd_kfold,
    }[which]
    try:
        handler(cfg, out, info)
    except OSError as exc:
        raise RunError("io", str(exc)) from exc
    info["timings"]["total"] = time.perf_counter() - t0
    manifest = {
        "command": which,
        "version": __version__,
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "config": cfg.to_dict(),
        **info,
    }
    (out / "manifest.json").write_text(_dump(manifest))
    return 0


def gen_synthetic(args) -> int:
    if args.kind == "gaussian":
        d = gaussian_anomalies(args.n_inliers, args.n_outliers, args.dim, seed=args.seed)
    else:
        d = signal_noise(args.n_inliers, args.n_outliers, seed=args.seed)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_csv(d, path)
    print(f"wrote {len(d)} rows ({d.class_counts()[1]} fraud) to {path}")
    return 0


# -- argument parsing -----------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraudbat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file; flags override its fields")
        p.add_argument("--data", help="transaction CSV")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--sampling", choices=SAMPLING_MODES)
        p.add_argument("--standardize", choices=("zscore", "minmax"))
        p.add_argument("--hidden", type=_int_list, help="hidden widths, e.g. 15,15")
        p.add_argument("--epochs", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--drop", help="comma-separated columns to drop, e.g. Time")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "evaluate":
            p.add_argument("--model", type=Path, help="model bundle (default: <out>/model.json)")

    g = sub.add_parser("gen-synthetic", help="write a synthetic transaction CSV")
    g.add_argument("--out", required=True, help="CSV path to write")
    g.add_argument("--kind", choices=("gaussian", "signal-noise"), default="gaussian")
    g.add_argument("--n-inliers", type=int, default=5000)
    g.add_argument("--n-outliers", type=int, default=50)
    g.add_argument("--dim", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    doc = cfg.to_dict()
    for key in ("data", "seed", "out", "standardize"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.sampling is not None:
        doc["sampling"]["mode"] = args.sampling
    if args.hidden is not None:
        doc["detector"]["hidden_dims"] = args.hidden
    if args.epochs is not None:
        doc["train"]["epochs"] = args.epochs
    if args.lr is not None:
        doc["train"]["learning_rate"] = args.lr
    if args.drop is not None:
        doc["drop_columns"] = [c for c in args.drop.split(",") if c]
    return PipelineConfig.from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "gen-synthetic":
            return gen_synthetic(args)
        cfg = config_from_args(args)
        return run_experiment(cfg, args.command, getattr(args, "model", None))
    except RunError as exc:
        category, message = exc.category, str(exc)
    except ConfigError as exc:
        category, message = "config", str(exc)
    except OSError as exc:
        category, message = "io", str(exc)
    except Exception as exc:  # noqa: BLE001 - last-resort single-line report
        category, message = "internal", f"{type(exc).__name__}: {exc}"
    print(f"error: {category}: {' '.join(message.split())}", file=sys.stderr)
    return EXIT_CODES[category]


if __name__ == "__main__":
    sys.exit(main())
