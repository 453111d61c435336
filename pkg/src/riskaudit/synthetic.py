"""Synthetic experiments: calibration-metric sample-size bias and the
calibrated-but-unequally-ranked two-group example."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import EQUAL_MASS, EQUAL_WIDTH, CalibrationEstimatorConfig
from .data import Dataset
from .errors import ConfigError, UndefinedMetricError

PERFECT = "perfect"
SQUARE = "square"
SCENARIOS = (PERFECT, SQUARE)


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def generate_calibration_stream(n: int, scenario: str, seed) -> tuple[np.ndarray, np.ndarray]:
    """Uniform scores with outcomes drawn from risk R (perfect) or R**2 (square).

    ``seed`` is an int or a ready :class:`numpy.random.Generator`.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    r = rng.random(n)
    rho = r if scenario == PERFECT else r * r
    y = (rng.random(n) < rho).astype(np.int8)
    return r, y


def ground_truth_errors(scenario: str) -> tuple[float, float]:
    """(ECE, RMSCE) of the population: E|R - rho| and sqrt(E(R - rho)^2)."""
    if scenario == PERFECT:
        return 0.0, 0.0
    if scenario == SQUARE:
        # int_0^1 (r - r^2) dr = 1/6 ;  int_0^1 (r - r^2)^2 dr = 1/30
        return 1.0 / 6.0, math.sqrt(1.0 / 30.0)
    raise ValueError(f"unknown scenario {scenario!r}")


def default_metric_panel() -> list[CalibrationEstimatorConfig]:
    fixed = dict(bin_policy="fixed", n_bins=15)
    bcs = dict(bin_policy="adaptive", min_per_bin=10)
    return [
        CalibrationEstimatorConfig(EQUAL_WIDTH, "ece-l1", label="ECE", **fixed),
        CalibrationEstimatorConfig(EQUAL_WIDTH, "ece-l1", label="ECE (BCS)", **bcs),
        CalibrationEstimatorConfig(EQUAL_MASS, "ece-l1", label="ACE", **fixed),
        CalibrationEstimatorConfig(EQUAL_MASS, "ece-l1", label="ACE (BCS)", **bcs),
        CalibrationEstimatorConfig(EQUAL_WIDTH, "debiased-rmsce", label="Kumar", **fixed),
        CalibrationEstimatorConfig(EQUAL_MASS, "debiased-rmsce", label="Kumar (equal-mass)", **fixed),
        CalibrationEstimatorConfig(EQUAL_MASS, "debiased-rmsce", label="Kumar (BCS)", **bcs),
    ]


@dataclass(frozen=True)
class BiasStudyConfig:
    sample_sizes: tuple[int, ...] = (100, 1000, 10000)
    n_repetitions: int = 100
    scenarios: tuple[str, ...] = SCENARIOS
    metric_configs: tuple[CalibrationEstimatorConfig, ...] = field(
        default_factory=lambda: tuple(default_metric_panel())
    )
    seed: int = 0

    def __post_init__(self):
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise ConfigError("sample sizes must be positive")
        if self.n_repetitions < 1:
            raise ConfigError("n_repetitions must be >= 1")
        for sc in self.scenarios:
            if sc not in SCENARIOS:
                raise ConfigError(f"unknown scenario {sc!r}")
        names = [m.name for m in self.metric_configs]
        if len(set(names)) != len(names):
            raise ConfigError("metric labels must be unique")

    @classmethod
    def from_dict(cls, d: dict) -> "BiasStudyConfig":
        kw = {}
        if "sample_sizes" in d:
            kw["sample_sizes"] = tuple(int(v) for v in d["sample_sizes"])
        if "n_repetitions" in d:
            kw["n_repetitions"] = int(d["n_repetitions"])
        if "scenarios" in d:
            kw["scenarios"] = tuple(d["scenarios"])
        if "seed" in d:
            kw["seed"] = int(d["seed"])
        if "metrics" in d:
            try:
                kw["metric_configs"] = tuple(CalibrationEstimatorConfig(**m) for m in d["metrics"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad metric config: {exc}") from exc
        return cls(**kw)


@dataclass
class CellSummary:
    median: float | None
    q1: float | None
    q3: float | None
    n_missing: int


@dataclass
class BiasStudyResult:
    config: BiasStudyConfig
    # (metric, scenario, n) -> one value per repetition, None where undefined
    values: dict
    ground_truth: dict

    def cell(self, metric: str, scenario: str, n: int) -> list:
        return self.values[(metric, scenario, n)]

    def summary(self, metric: str, scenario: str, n: int) -> CellSummary:
        raw = self.values[(metric, scenario, n)]
        vals = np.array([v for v in raw if v is not None])
        missing = len(raw) - vals.size
        if vals.size == 0:
            return CellSummary(None, None, None, missing)
        q1, med, q3 = np.percentile(vals, [25, 50, 75])
        return CellSummary(float(med), float(q1), float(q3), missing)

    def median(self, metric: str, scenario: str, n: int) -> float | None:
        return self.summary(metric, scenario, n).median

    def long_rows(self):
        """(metric, scenario, n, repetition, value) rows in deterministic order."""
        for m in self.config.metric_configs:
            for sc in self.config.scenarios:
                for n in self.config.sample_sizes:
                    for rep, v in enumerate(self.values[(m.name, sc, n)]):
                        yield m.name, sc, n, rep, v


def run_bias_study(config: BiasStudyConfig) -> BiasStudyResult:
    """Repeat every (scenario, sample size) draw and apply every metric to it.

    Each repetition draws its own stream from a seed derived from
    (seed, scenario, sample size, repetition); all metrics see the same draw.
    """
    values = {}
    for si, sc in enumerate(config.scenarios):
        for n in config.sample_sizes:
            cells = {m.name: [] for m in config.metric_configs}
            for rep in range(config.n_repetitions):
                s, y = generate_calibration_stream(n, sc, _rng(config.seed, SCENARIOS.index(sc), n, rep))
                for m in config.metric_configs:
                    try:
                        v = m.evaluate(s, y)[0]
                    except UndefinedMetricError:
                        v = None
                    cells[m.name].append(v)
            for name, vals in cells.items():
                values[(name, sc, n)] = vals
    truth = {sc: ground_truth_errors(sc) for sc in config.scenarios}
    return BiasStudyResult(config, values, truth)


# two-group ranking example ---------------------------------------------------

HIGH_RISK_GROUP = "blue"
LOW_RISK_GROUP = "orange"


def generate_two_group_example(n_per_group: int, seed: int) -> Dataset:
    """Two equally sized, perfectly calibrated groups with mirrored risk laws.

    True risks are Beta(4, 2) in the ``blue`` group (mean 2/3) and Beta(2, 4)
    in the ``orange`` group (mean 1/3); the score equals the true risk.
    """
    if n_per_group < 1:
        raise ValueError("n_per_group must be >= 1")
    rng = np.random.default_rng(seed)
    blue = rng.beta(4.0, 2.0, n_per_group)
    orange = rng.beta(2.0, 4.0, n_per_group)
    r = np.concatenate((blue, orange))
    y = (rng.random(r.size) < r).astype(np.int8)
    group = np.repeat(np.array([0, 1], dtype=np.int32), n_per_group)
    return Dataset(
        scores=r,
        outcomes=y,
        attributes={"group": group},
        schema=(("group", (HIGH_RISK_GROUP, LOW_RISK_GROUP)),),
    )


# attributes and category shares of a population-registry cohort
CASE_STUDY_ATTRIBUTES = (
    ("age", (0.12, 0.17, 0.19, 0.19, 0.18, 0.15)),
    ("gender", (0.5, 0.5)),
    ("lgbt", (0.96, 0.04)),
    ("heritage", (0.86, 0.09, 0.05)),
    ("region", (0.3, 0.25, 0.2, 0.15, 0.1)),
    ("income", (0.25, 0.25, 0.25, 0.25)),
    ("living_alone", (0.75, 0.25)),
    ("education", (0.08, 0.32, 0.4, 0.2)),
)


def generate_case_study_shape(n_rows: int = 240_000, seed: int = 0, attributes=CASE_STUDY_ATTRIBUTES) -> Dataset:
    """Large synthetic cohort with several categorical sensitive attributes.

    Attributes are drawn independently with the given category shares.  The
    latent log-odds get a random offset per category, so groups differ in
    base rate, and the overall base rate is near 1/2 (a case-control
    design).  Scores are a slightly miscalibrated, noisy logistic transform
    of the latent.
    """
    rng = np.random.default_rng(seed)
    codes, schema = {}, []
    logit = rng.normal(0.0, 1.2, n_rows)
    for name, shares in attributes:
        p = np.asarray(shares, dtype=np.float64)
        c = rng.choice(p.size, size=n_rows, p=p / p.sum()).astype(np.int32)
        codes[name] = c
        schema.append((name, tuple(f"{name}{v}" for v in range(p.size))))
        logit += rng.normal(0.0, 0.25, p.size)[c]
    risk = 1.0 / (1.0 + np.exp(-logit))
    y = (rng.random(n_rows) < risk).astype(np.int8)
    score = 1.0 / (1.0 + np.exp(-(0.9 * logit + rng.normal(0.0, 0.3, n_rows))))
    return Dataset(scores=score, outcomes=y, attributes=codes, schema=tuple(schema))
