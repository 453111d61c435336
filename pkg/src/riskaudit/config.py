"""Audit configuration: JSON file keys, defaults and canonical digest."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .calibration import EQUAL_MASS, EQUAL_WIDTH, CalibrationEstimatorConfig
from .errors import ConfigError
from .resampling import BootstrapPlan

ALL_METRICS = ("drmsce", "ece-baselines", "auroc", "auprg", "eur")
ALL_CURVES = ("reliability", "roc", "prg", "representation", "histogram")

# keys that cannot change report content
_RUNTIME_ONLY = ("output_dir", "workers")


def default_baselines() -> list[dict]:
    return [
        CalibrationEstimatorConfig(EQUAL_WIDTH, "ece-l1", "fixed", 15, label="ece").to_dict(),
        CalibrationEstimatorConfig(EQUAL_MASS, "ece-l1", "fixed", 15, label="ace").to_dict(),
    ]


@dataclass
class AuditConfig:
    """Everything an audit run needs.

    Loaded from a JSON object whose keys are the field names below; unknown
    keys are rejected.  ``attribute_values`` optionally declares the allowed
    values per sensitive attribute (undeclared attributes accept whatever
    occurs in the data).
    """

    input: str | None = None
    delimiter: str = ","
    score_column: str = "score"
    outcome_column: str = "outcome"
    sensitive_attributes: list[str] = field(default_factory=list)
    attribute_values: dict[str, list[str]] = field(default_factory=dict)
    max_combination: int = 1
    min_group_size: int = 1
    n_bootstrap: int = 200
    ci_level: float = 0.95
    seed: int = 0
    drop_threshold: float = 0.5
    metrics: list[str] = field(default_factory=lambda: list(ALL_METRICS))
    curves: list[str] = field(default_factory=lambda: list(ALL_CURVES))
    calibration_baselines: list[dict] = field(default_factory=default_baselines)
    min_per_bin: int = 10
    loess_span: float = 0.75
    grid_size: int = 101
    histogram_bins: int = 20
    threshold_range: list[float] | None = None
    output_dir: str = "audit-out"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.max_combination < 1:
            raise ConfigError("max_combination must be >= 1")
        if self.min_group_size < 1:
            raise ConfigError("min_group_size must be >= 1")
        if self.n_bootstrap < 0:
            raise ConfigError("n_bootstrap must be >= 0")
        if not 0 < self.ci_level < 1:
            raise ConfigError("ci_level must be in (0, 1)")
        if not 0 <= self.drop_threshold <= 1:
            raise ConfigError("drop_threshold must be in [0, 1]")
        bad = [m for m in self.metrics if m not in ALL_METRICS]
        if bad:
            raise ConfigError(f"unknown metric(s) {bad}; choose from {list(ALL_METRICS)}")
        bad = [c for c in self.curves if c not in ALL_CURVES]
        if bad:
            raise ConfigError(f"unknown curve(s) {bad}; choose from {list(ALL_CURVES)}")
        if self.min_per_bin < 2:
            raise ConfigError("min_per_bin must be >= 2")
        if not 0 < self.loess_span <= 1:
            raise ConfigError("loess_span must be in (0, 1]")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        if self.histogram_bins < 1:
            raise ConfigError("histogram_bins must be >= 1")
        if self.threshold_range is not None:
            if len(self.threshold_range) != 2 or self.threshold_range[0] > self.threshold_range[1]:
                raise ConfigError("threshold_range must be [low, high] with low <= high")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if len(self.delimiter) != 1:
            raise ConfigError("delimiter must be a single character")
        try:
            labels = [c.name for c in self.baseline_configs()]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad calibration baseline: {exc}") from exc
        if len(set(labels)) != len(labels):
            raise ConfigError("calibration baseline labels must be unique")

    def baseline_configs(self) -> list[CalibrationEstimatorConfig]:
        return [CalibrationEstimatorConfig(**d) for d in self.calibration_baselines]

    @property
    def plan(self) -> BootstrapPlan:
        return BootstrapPlan(self.n_bootstrap, self.ci_level, self.seed, self.drop_threshold)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["calibration_baselines"] = [c.to_dict() for c in self.baseline_configs()]
        return d

    def content_dict(self) -> dict:
        """The effective config minus keys that only affect where/how fast it runs."""
        d = self.to_dict()
        for k in _RUNTIME_ONLY:
            d.pop(k)
        return d

    def digest(self) -> str:
        canon = json.dumps(self.content_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "AuditConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "AuditConfig":
        """Read a JSON config file; ``overrides`` (e.g. CLI flags) win over file keys."""
        d = {}
        if path is not None:
            try:
                d = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(d, dict):
                raise ConfigError("config file must hold a JSON object")
        d.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(d)
