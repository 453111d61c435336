"""Benchmark entry points writing long-format result tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .audit import AuditReport, emit_report, run_audit
from .config import AuditConfig
from .errors import ConfigError
from .synthetic import (
    HIGH_RISK_GROUP,
    LOW_RISK_GROUP,
    BiasStudyConfig,
    BiasStudyResult,
    generate_two_group_example,
    run_bias_study,
)


def _num(v) -> str:
    return "NA" if v is None else format(float(v), ".17g")


def load_study_config(path=None, overrides: dict | None = None) -> BiasStudyConfig:
    d = {}
    if path is not None:
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read study config {path}: {exc}") from exc
    d.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return BiasStudyConfig.from_dict(d)


def write_bias_study(result: BiasStudyResult, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config

    values = out / "bias_study.csv"
    with values.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "scenario", "n", "repetition", "value"])
        for metric, sc, n, rep, v in result.long_rows():
            w.writerow([metric, sc, n, rep, _num(v)])

    summary = out / "bias_summary.csv"
    with summary.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "scenario", "n", "median", "q1", "q3", "n_missing"])
        for m in cfg.metric_configs:
            for sc in cfg.scenarios:
                for n in cfg.sample_sizes:
                    s = result.summary(m.name, sc, n)
                    w.writerow([m.name, sc, n, _num(s.median), _num(s.q1), _num(s.q3), s.n_missing])

    truth = out / "ground_truth.csv"
    with truth.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "ece", "rmsce"])
        for sc in cfg.scenarios:
            e, r = result.ground_truth[sc]
            w.writerow([sc, _num(e), _num(r)])

    meta = out / "study_config.json"
    meta.write_text(
        json.dumps(
            {
                "sample_sizes": list(cfg.sample_sizes),
                "n_repetitions": cfg.n_repetitions,
                "scenarios": list(cfg.scenarios),
                "seed": cfg.seed,
                "metrics": [m.to_dict() for m in cfg.metric_configs],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return [values, summary, truth, meta]


def run_benchmarks(study_config_path, output_dir, overrides: dict | None = None) -> list[Path]:
    """Run the calibration-metric sample-size study and write its tables."""
    cfg = load_study_config(study_config_path, overrides)
    return write_bias_study(run_bias_study(cfg), output_dir)


def two_group_checks(report: AuditReport, dataset) -> dict:
    """Summary numbers for the two-group ranking example."""
    blue = report.group(f"group={HIGH_RISK_GROUP}")
    orange = report.group(f"group={LOW_RISK_GROUP}")
    checks = {}
    for g in (blue, orange):
        m = g.metrics
        rep = g.curves.get("representation")
        ratio = rep.y[~np.isnan(rep.y)] if rep is not None else np.array([])
        checks[g.name] = {
            "drmsce": m["drmsce"].point_estimate if "drmsce" in m else None,
            "auroc": m["auroc"].point_estimate if "auroc" in m else None,
            "auroc_ci": [m["auroc"].ci_lower, m["auroc"].ci_upper] if "auroc" in m else None,
            "eur": m["eur"].point_estimate if "eur" in m else None,
            "max_representation": float(ratio.max()) if ratio.size else None,
            "min_representation": float(ratio.min()) if ratio.size else None,
        }
    codes = dataset.attributes["group"]
    pos = dataset.outcomes == 1
    for j, name in enumerate((HIGH_RISK_GROUP, LOW_RISK_GROUP)):
        checks[f"group={name}"]["median_score_given_positive"] = float(
            np.median(dataset.scores[pos & (codes == j)])
        )
    return checks


def run_twogroup(n_per_group: int, seed: int, output_dir, n_bootstrap: int = 200, workers: int = 1) -> dict:
    dataset = generate_two_group_example(n_per_group, seed)
    cfg = AuditConfig(
        sensitive_attributes=["group"],
        n_bootstrap=n_bootstrap,
        seed=seed,
        output_dir=str(output_dir),
        workers=workers,
        metrics=["drmsce", "auroc", "auprg", "eur"],
    )
    report = run_audit(cfg, dataset)
    emit_report(report, output_dir)
    checks = two_group_checks(report, dataset)
    Path(output_dir, "twogroup_summary.json").write_text(
        json.dumps(checks, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    return checks
