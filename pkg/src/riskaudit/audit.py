"""End-to-end audit: ingest, enumerate groups, bootstrap every metric, write files."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationEstimatorConfig, reliability_curve
from .config import AuditConfig
from .curves import CurveSeries, curve_to_csv
from .data import Dataset, GroupDefinition, GroupIndex, enumerate_groups, group_slice, validate_dataset
from .discrimination import discrimination_summary
from .errors import ConfigError, DataValidationError, UndefinedMetricError
from .ranking import SelectionSweep, WeightedSweep
from .resampling import (
    CurveSpec,
    Panel,
    MetricEstimate,
    bootstrap_group,
    pointwise_bands,
    replicate_rng,
    summarize,
)

POPULATION_STREAM = "population"


@dataclass
class GroupResult:
    group_id: str
    definition: GroupDefinition
    size: int
    positive_count: int
    metrics: dict = field(default_factory=dict)
    realized_bins: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    curve_dropped: dict = field(default_factory=dict)
    eur_skipped_draws: int | None = None

    @property
    def name(self) -> str:
        return self.definition.display_name

    @property
    def base_rate(self) -> float:
        return self.positive_count / self.size


@dataclass
class AuditReport:
    config: AuditConfig
    n_rows: int
    n_positive: int
    metric_names: list[str]
    groups: list[GroupResult]
    notes: list[str] = field(default_factory=list)

    def group(self, name: str) -> GroupResult:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "tool": "riskaudit",
            "version": __version__,
            "seed": self.config.seed,
            "config_digest": self.config.digest(),
            "config": self.config.content_dict(),
            "dataset": {
                "n_rows": self.n_rows,
                "n_positive": self.n_positive,
                "base_rate": self.n_positive / self.n_rows,
            },
            "metrics": list(self.metric_names),
            "notes": list(self.notes),
            "groups": [_group_dict(g) for g in self.groups],
        }


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-") or "group"


def group_dir_name(index: int, definition: GroupDefinition) -> str:
    return f"g{index:04d}-{_slug(definition.display_name)}"


def _group_dict(g: GroupResult) -> dict:
    metrics = {}
    for name, est in g.metrics.items():
        d = est.to_dict()
        if name in g.realized_bins:
            d["realized_bins"] = g.realized_bins[name]
        metrics[name] = d
    return {
        "id": g.group_id,
        "name": g.name,
        "conditions": {a: v for a, v in g.definition.conditions},
        "size": g.size,
        "positive_count": g.positive_count,
        "base_rate": g.base_rate,
        "metrics": metrics,
        "eur_skipped_draws": g.eur_skipped_draws,
        "curves": {k: f"curves/{g.group_id}/{k}.csv" for k in g.curves},
        "curve_replicates_dropped": dict(g.curve_dropped),
    }


# ---------------------------------------------------------------------------
# ingestion


def read_rows(path, delimiter: str = ","):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh, delimiter=delimiter))


def load_dataset(config: AuditConfig) -> Dataset:
    if not config.input:
        raise ConfigError("no input table configured (set `input` or pass --input)")
    rows = read_rows(config.input, config.delimiter)
    if rows:
        header = set(rows[0])
        needed = [config.score_column, config.outcome_column, *config.sensitive_attributes]
        absent = [c for c in needed if c not in header]
        if absent:
            raise DataValidationError([f"input has no column {c!r}" for c in absent])
    schema = [(a, config.attribute_values.get(a)) for a in config.sensitive_attributes]
    return validate_dataset(rows, schema, config.score_column, config.outcome_column)


# ---------------------------------------------------------------------------
# per-group work


def _histogram(scores: np.ndarray, bins: int) -> CurveSeries:
    counts, edges = np.histogram(scores, bins=bins, range=(0.0, 1.0))
    centers = (edges[:-1] + edges[1:]) / 2.0
    return CurveSeries(centers, counts / scores.size, axis_labels=("risk score", "fraction of group"))


def _group_metric_fns(config: AuditConfig) -> tuple[dict, dict]:
    fns, calib = {}, {}
    if "drmsce" in config.metrics:
        cfg = CalibrationEstimatorConfig(min_per_bin=config.min_per_bin, label="drmsce")
        fns["drmsce"] = cfg
        calib["drmsce"] = cfg
    if "ece-baselines" in config.metrics:
        for cfg in config.baseline_configs():
            fns[cfg.name] = cfg
            calib[cfg.name] = cfg
    return fns, calib


def _discrimination_panel(config: AuditConfig, grid) -> Panel | None:
    metrics = tuple(m for m in ("auroc", "auprg") if m in config.metrics)
    curves = {c: grid for c in ("roc", "prg") if c in config.curves}
    if not (metrics or curves):
        return None

    def fn(s, y):
        m, c = discrimination_summary(s, y)
        return {k: m[k] for k in metrics}, {k: c[k] for k in curves}

    return Panel(fn, metrics, curves)


def _run_group(job) -> dict:
    scores, outcomes, config, stream_id = job
    order = np.argsort(scores, kind="stable")
    scores, outcomes = scores[order], outcomes[order].astype(np.float64)
    fns, calib = _group_metric_fns(config)
    grid_unit = np.linspace(0.0, 1.0, config.grid_size)
    specs = {}
    if "reliability" in config.curves:
        grid = np.linspace(scores.min(), scores.max(), config.grid_size)
        specs["reliability"] = CurveSpec(
            partial(reliability_curve, span=config.loess_span, grid=grid), grid
        )
    panel = _discrimination_panel(config, grid_unit)
    panels = [panel] if panel is not None else []
    res = bootstrap_group(scores, outcomes, fns, config.plan, stream_id, curves=specs, panels=panels)
    bins = {}
    for name, cfg in calib.items():
        try:
            bins[name] = cfg.evaluate(scores, outcomes)[1]
        except UndefinedMetricError:
            bins[name] = None
    return {"metrics": res.metrics, "curves": res.curves, "dropped": res.curve_dropped, "bins": bins}


def _population_metrics(dataset: Dataset, groups: list[GroupIndex], config: AuditConfig):
    """EUR estimates and representation curves for every group.

    Threshold draws come from the whole population, so replicates resample
    the whole evaluation set (one shared stream) rather than the group.
    """
    want_eur = "eur" in config.metrics
    want_curve = "representation" in config.curves
    out = [dict() for _ in groups]
    if not (want_eur or want_curve):
        return out
    plan = config.plan
    trange = config.threshold_range
    sweep0 = SelectionSweep(dataset.scores, dataset.outcomes)
    n = len(dataset)
    rank = np.empty(n, dtype=np.int64)
    rank[sweep0.order] = np.arange(n)
    lo, hi = (trange if trange is not None else (dataset.scores.min(), dataset.scores.max()))
    grid = np.linspace(lo, hi, config.grid_size)
    members = [np.sort(rank[g.row_indices]) for g in groups]

    eur_vals = [[] for _ in groups]
    curve_vals = [[] for _ in groups]
    for k in range(plan.n_replicates):
        rng = replicate_rng(plan.base_seed, POPULATION_STREAM, k)
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        sweep = WeightedSweep(sweep0, counts)
        for j, m in enumerate(members):
            try:
                e, ratio = sweep.group(m, trange, grid if want_curve else None)
            except UndefinedMetricError:
                e, ratio = None, None
            eur_vals[j].append(e)
            if ratio is not None:
                curve_vals[j].append(ratio)

    for j, m in enumerate(members):
        member = np.zeros(n, dtype=bool)
        member[m] = True  # aligned with sweep0's sorted order
        member = member[rank]
        result = out[j]
        if want_eur:
            try:
                point = sweep0.eur(member, trange)
                pval, reason, skipped = point.value, None, point.n_skipped
            except UndefinedMetricError as exc:
                pval, reason, skipped = None, exc.reason, None
            vals = eur_vals[j]
            result["eur"] = summarize(pval, reason, vals, sum(v is None for v in vals), plan)
            result["skipped"] = skipped
        if want_curve:
            try:
                center = sweep0.representation_ratio(member, grid)
            except UndefinedMetricError:
                result["curve"] = None
                result["curve_dropped"] = plan.n_replicates
                continue
            result["curve"] = pointwise_bands(
                center, curve_vals[j], plan, grid, ("threshold", "normalized representation")
            )
            result["curve_dropped"] = plan.n_replicates - len(curve_vals[j])
    return out


# ---------------------------------------------------------------------------


def run_audit(config: AuditConfig, dataset: Dataset | None = None) -> AuditReport:
    """Validate, enumerate groups and estimate every enabled metric per group.

    ``dataset`` may be passed directly (e.g. from a generator); otherwise the
    configured input table is read.  Undefined metrics stay in the report as
    missing values with a reason code.
    """
    if dataset is None:
        dataset = load_dataset(config)
    groups = enumerate_groups(
        dataset, config.sensitive_attributes, config.max_combination, config.min_group_size
    )
    notes = []
    if len(groups) == 1 and config.sensitive_attributes:
        notes.append("no group reached min_group_size; only the overall group is reported")

    fns, _ = _group_metric_fns(config)
    metric_names = list(fns) + [m for m in ("auroc", "auprg") if m in config.metrics]
    if "eur" in config.metrics:
        metric_names.append("eur")

    jobs = []
    for i, g in enumerate(groups):
        s, y = group_slice(dataset, g)
        jobs.append((s, y, config, group_dir_name(i, g.definition)))
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_group = list(pool.map(_run_group, jobs, chunksize=1))
    else:
        per_group = [_run_group(j) for j in jobs]

    population = _population_metrics(dataset, groups, config)

    results = []
    for i, (g, res, pop) in enumerate(zip(groups, per_group, population)):
        gid = group_dir_name(i, g.definition)
        r = GroupResult(gid, g.definition, g.size, g.positive_count)
        r.metrics.update(res["metrics"])
        r.realized_bins.update(res["bins"])
        if "eur" in pop:
            r.metrics["eur"] = pop["eur"]
            r.eur_skipped_draws = pop["skipped"]
        curves = dict(res["curves"])
        dropped = dict(res["dropped"])
        if "curve" in pop:
            curves["representation"] = pop["curve"]
            dropped["representation"] = pop["curve_dropped"]
        if "histogram" in config.curves:
            curves["histogram"] = _histogram(jobs[i][0], config.histogram_bins)
            dropped["histogram"] = 0
        r.curves = {k: curves[k] for k in config.curves if k in curves}
        r.curve_dropped = {k: dropped[k] for k in r.curves}
        results.append(r)

    return AuditReport(
        config=config,
        n_rows=len(dataset),
        n_positive=int(dataset.outcomes.sum()),
        metric_names=metric_names,
        groups=results,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return "NA" if not math.isfinite(v) else format(v, ".17g")
    return str(v)


def metrics_table(report: AuditReport, delimiter: str = ",") -> str:
    fields = ["point_estimate", "median", "ci_lower", "ci_upper", "n_replicates_used",
              "n_replicates_dropped", "reliability_flag", "missing_reason"]
    header = ["group_id", "group", "size", "positive_count", "base_rate"]
    for m in report.metric_names:
        header += [f"{m}:{f}" for f in fields]
        if any(m in g.realized_bins for g in report.groups):
            header.append(f"{m}:realized_bins")
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    for g in report.groups:
        row = [g.group_id, g.name, g.size, g.positive_count, _cell(g.base_rate)]
        for m in report.metric_names:
            est: MetricEstimate = g.metrics[m]
            d = est.to_dict()
            row += ["" if f == "missing_reason" and d[f] is None else _cell(d[f]) for f in fields]
            if f"{m}:realized_bins" in header:
                row.append(_cell(g.realized_bins.get(m)))
        w.writerow(row)
    return buf.getvalue()


def _empty_curve_csv(kind: str) -> str:
    return curve_to_csv(CurveSeries([], [], axis_labels=(kind, "undefined")))


def emit_report(report: AuditReport, output_dir) -> list[Path]:
    """Write ``report.json``, ``metrics_by_group.csv`` and one CSV per group curve.

    Returns the written paths.  Undefined curves are written as header-only
    files so every (group, curve kind) pair has a file.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "report.json"
    p.write_text(json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    written.append(p)
    p = out / "metrics_by_group.csv"
    p.write_text(metrics_table(report), encoding="utf-8")
    written.append(p)
    for g in report.groups:
        gdir = out / "curves" / g.group_id
        if g.curves:
            gdir.mkdir(parents=True, exist_ok=True)
        for kind, curve in g.curves.items():
            p = gdir / f"{kind}.csv"
            p.write_text(curve_to_csv(curve) if curve is not None else _empty_curve_csv(kind), encoding="utf-8")
            written.append(p)
    return written
