"""Pipeline configuration: one JSON-serializable record for every tunable."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .autoenc import DetectorConfig
from .batopt import BatConfig
from .neural import TrainConfig

SAMPLING_MODES = ("none", "under", "smote")
BASELINES = ("logistic", "tree_gini", "tree_entropy")


class ConfigError(ValueError):
    pass


@dataclass
class SamplingConfig:
    mode: str = "none"
    smote_k: int = 5
    smote_ratio: float = 1.0

    def __post_init__(self):
        if self.mode not in SAMPLING_MODES:
            raise ConfigError(f"sampling mode must be one of {SAMPLING_MODES}, got {self.mode!r}")


@dataclass
class BaselineConfig:
    models: list[str] = field(default_factory=lambda: list(BASELINES))
    logistic_lr: float = 0.1
    logistic_epochs: int = 200
    tree_max_depth: int | None = 8
    tree_min_leaf: int = 1

    def __post_init__(self):
        unknown = set(self.models) - set(BASELINES)
        if unknown:
            raise ConfigError(f"unknown baselines {sorted(unknown)}")


@dataclass
class PipelineConfig:
    data: str | None = None
    has_header: bool | None = None
    drop_columns: list[str] = field(default_factory=list)
    standardize: str = "zscore"
    train_fraction: float = 0.75
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    bat: BatConfig = field(default_factory=BatConfig)
    fitness_epochs: int = 10
    selection_fraction: float = 0.25
    mask: list[int] | None = None
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    kfold: int = 3
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    fc_head: bool = False
    fc_hidden: int = 4
    out: str = "runs/default"
    seed: int = 0

    def __post_init__(self):
        if self.standardize not in ("zscore", "minmax"):
            raise ConfigError(f"standardize must be zscore or minmax, got {self.standardize!r}")
        if not 0 < self.train_fraction < 1 or not 0 < self.selection_fraction < 1:
            raise ConfigError("train_fraction and selection_fraction must lie in (0, 1)")
        if self.kfold < 2:
            raise ConfigError("kfold must be >= 2")
        self.detector.standardize = self.standardize
        # one global seed drives every randomized stage
        self.train.seed = self.seed
        self.bat.seed = self.seed

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def hash(self) -> str:
        """Digest of everything that affects results (the output dir is excluded)."""
        doc = self.to_dict()
        doc.pop("out")
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        nested = {
            "detector": DetectorConfig,
            "train": TrainConfig,
            "bat": BatConfig,
            "sampling": SamplingConfig,
            "baselines": BaselineConfig,
        }
        kwargs = {}
        for key, value in doc.items():
            if key not in _field_names(cls):
                raise ConfigError(f"unknown config field {key!r}")
            if key in nested:
                sub = nested[key]
                extra = set(value) - _field_names(sub)
                if extra:
                    raise ConfigError(f"unknown {key} fields {sorted(extra)}")
                try:
                    value = sub(**value)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid {key} config: {exc}") from exc
            kwargs[key] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def updated(self, **overrides) -> "PipelineConfig":
        """Copy with top-level fields replaced (None values are ignored)."""
        doc = self.to_dict()
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig.from_dict(doc)


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}
