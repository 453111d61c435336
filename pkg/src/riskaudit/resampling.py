"""Test-set bootstrap with reproducible per-replicate random streams.

Replicate ``k`` of stream ``stream_id`` always draws the same resample,
whatever the execution order or number of workers.  Samples are presorted
by score once, and each resample is handed to metrics in ascending score
order (the multiset is what matters; all metrics here are order invariant).
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

import numpy as np

from .curves import CurveSeries, interpolate_on_grid
from .errors import UndefinedMetricError

OK = "ok"
UNRELIABLE = "unreliable"


@dataclass(frozen=True)
class BootstrapPlan:
    n_replicates: int = 200
    ci_level: float = 0.95
    base_seed: int = 0
    drop_threshold: float = 0.5

    def __post_init__(self):
        if self.n_replicates < 0:
            raise ValueError("n_replicates must be >= 0")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must be in (0, 1)")
        if not 0 <= self.drop_threshold <= 1:
            raise ValueError("drop_threshold must be in [0, 1]")


@dataclass(frozen=True)
class MetricEstimate:
    """Point estimate plus bootstrap summary.

    ``point_estimate`` is computed on the unresampled data.  Any field may be
    ``None`` when undefined; ``missing_reason`` then says why.
    """

    point_estimate: float | None
    median: float | None
    ci_lower: float | None
    ci_upper: float | None
    n_replicates_used: int
    n_replicates_dropped: int
    reliability_flag: str = OK
    missing_reason: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def replicate_rng(base_seed: int, stream_id: str, replicate: int) -> np.random.Generator:
    """Independent counter-based generator for one (seed, stream, replicate)."""
    digest = hashlib.blake2b(f"{int(base_seed)}\x1f{stream_id}".encode(), digest_size=16).digest()
    seq = np.random.SeedSequence(int.from_bytes(digest, "little"), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(seq))


def resample_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of a size-``n`` draw with replacement from ``range(n)``."""
    counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
    return np.repeat(np.arange(n), counts)


def percentile_interval(values, ci_level: float) -> tuple[float, float]:
    """Order statistics at ranks ceil(a*m) and ceil((1-a)*m), a = (1-level)/2."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    m = v.size
    if m == 0:
        raise ValueError("no values")
    alpha = (1.0 - ci_level) / 2.0
    lo = max(1, math.ceil(alpha * m - 1e-9))
    hi = min(m, max(1, math.ceil((1.0 - alpha) * m - 1e-9)))
    return float(v[lo - 1]), float(v[hi - 1])


def summarize(point, reason, values, n_dropped: int, plan: BootstrapPlan) -> MetricEstimate:
    values = [v for v in values if v is not None]
    total = len(values) + n_dropped
    frac = n_dropped / total if total else 0.0
    flag = UNRELIABLE if (frac > plan.drop_threshold or (total and not values)) else OK
    if not values:
        if point is None:
            missing = reason
        else:
            missing = "all-replicates-undefined" if total else "bootstrap-disabled"
        return MetricEstimate(point, None, None, None, 0, n_dropped, flag, missing)
    lo, hi = percentile_interval(values, plan.ci_level)
    med = float(np.median(values))
    return MetricEstimate(point, med, lo, hi, len(values), n_dropped, flag, reason)


def _finite(v):
    if v is None or not math.isfinite(v):
        return None, "non-finite"
    return float(v), None


def _evaluate(fn, s, y):
    try:
        v = fn(s, y)
    except UndefinedMetricError as exc:
        return None, exc.reason
    return _finite(v)


@dataclass(frozen=True)
class CurveSpec:
    """A curve function ``fn(scores, outcomes) -> CurveSeries`` and a fixed grid.

    If the returned curve's x values differ from the grid, it is
    interpolated onto it.
    """

    fn: Callable
    grid: np.ndarray


@dataclass(frozen=True)
class Panel:
    """Several metrics and curves computed together from one pass over a sample.

    ``fn(scores, outcomes)`` returns ``(metric values, curves)`` as two dicts
    keyed by the names in ``metrics`` and ``curves``; ``curves`` maps each
    curve name to its grid.  Raising :class:`UndefinedMetricError` marks
    everything in the panel undefined.
    """

    fn: Callable
    metrics: tuple = ()
    curves: Mapping = field(default_factory=dict)


@dataclass
class GroupBootstrap:
    metrics: dict
    curves: dict
    curve_dropped: dict


def _on_grid(c: CurveSeries, grid: np.ndarray) -> np.ndarray:
    if c.x.shape == grid.shape and np.array_equal(c.x, grid):
        return c.y
    return interpolate_on_grid(c, grid)


def _curve_on_grid(spec: CurveSpec, s, y, with_labels=False):
    try:
        c = spec.fn(s, y)
    except UndefinedMetricError:
        return (None, None) if with_labels else None
    vals = _on_grid(c, spec.grid)
    return (vals, c.axis_labels) if with_labels else vals


def _single_metric(name, fn):
    return Panel(lambda s, y: ({name: fn(s, y)}, {}), (name,))


def _single_curve(name, spec: CurveSpec):
    return Panel(lambda s, y: ({}, {name: spec.fn(s, y)}), (), {name: spec.grid})


def _run_panels(panels, s, y):
    """Metric ``(value, reason)`` pairs and curve ``(grid values, labels)`` (or None)."""
    mvals, cvals = {}, {}
    for p in panels:
        try:
            m, c = p.fn(s, y)
        except UndefinedMetricError as exc:
            mvals.update({name: (None, exc.reason) for name in p.metrics})
            cvals.update({name: None for name in p.curves})
            continue
        mvals.update({name: _finite(m[name]) for name in p.metrics})
        cvals.update({name: (_on_grid(c[name], grid), c[name].axis_labels) for name, grid in p.curves.items()})
    return mvals, cvals


def pointwise_bands(center: np.ndarray, reps: list, plan: BootstrapPlan, grid, labels) -> CurveSeries:
    """Percentile band per grid point from replicate curves (NaNs ignored)."""
    lower = np.full(grid.shape, np.nan)
    upper = np.full(grid.shape, np.nan)
    if reps:
        mat = np.sort(np.vstack(reps), axis=0)  # NaNs sort last
        m = np.sum(~np.isnan(mat), axis=0)
        alpha = (1.0 - plan.ci_level) / 2.0
        lo_rank = np.maximum(1, np.ceil(alpha * m - 1e-9)).astype(np.int64)
        hi_rank = np.minimum(m, np.maximum(1, np.ceil((1.0 - alpha) * m - 1e-9))).astype(np.int64)
        cols = np.flatnonzero(m > 0)
        lower[cols] = mat[lo_rank[cols] - 1, cols]
        upper[cols] = mat[hi_rank[cols] - 1, cols]
    # the center line comes from the original sample and may sit outside the
    # replicate percentiles; widen so the band always encloses it
    has = ~np.isnan(center) & ~np.isnan(lower)
    lower[has] = np.minimum(lower[has], center[has])
    upper[has] = np.maximum(upper[has], center[has])
    return CurveSeries(grid, center, lower, upper, labels)


def bootstrap_group(
    scores,
    outcomes,
    metrics: Mapping[str, Callable],
    plan: BootstrapPlan,
    stream_id: str,
    curves: Mapping[str, CurveSpec] | None = None,
    workers: int = 1,
    panels=(),
) -> GroupBootstrap:
    """Bootstrap several metrics and curves on shared replicates of one group.

    ``metrics`` map names to ``fn(scores, outcomes) -> float``, ``curves``
    map names to :class:`CurveSpec`; ``panels`` add jointly computed ones.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(outcomes, dtype=np.float64)
    if s.size == 0:
        raise ValueError("group has no samples")
    all_panels = [_single_metric(k, fn) for k, fn in metrics.items()]
    all_panels += [_single_curve(k, spec) for k, spec in (curves or {}).items()]
    all_panels += list(panels)
    metric_names = [m for p in all_panels for m in p.metrics]
    curve_grids = {k: g for p in all_panels for k, g in p.curves.items()}
    if len(set(metric_names)) != len(metric_names) or len(curve_grids) != sum(len(p.curves) for p in all_panels):
        raise ValueError("duplicate metric or curve names")
    order = np.argsort(s, kind="stable")
    s, y = s[order], y[order]
    n = s.size

    def one(k):
        idx = resample_indices(n, replicate_rng(plan.base_seed, stream_id, k))
        return _run_panels(all_panels, s[idx], y[idx])

    ks = range(plan.n_replicates)
    if workers > 1 and plan.n_replicates > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]

    point_m, point_c = _run_panels(all_panels, s, y)
    out_metrics = {}
    for name in metric_names:
        point, reason = point_m[name]
        vals = [r[0][name][0] for r in results]
        dropped = sum(v is None for v in vals)
        out_metrics[name] = summarize(point, reason, vals, dropped, plan)

    out_curves, curve_dropped = {}, {}
    for name, grid in curve_grids.items():
        reps = [r[1][name][0] for r in results if r[1][name] is not None]
        curve_dropped[name] = plan.n_replicates - len(reps)
        if point_c[name] is None:
            out_curves[name] = None
            continue
        center, labels = point_c[name]
        out_curves[name] = pointwise_bands(center, reps, plan, grid, labels)
    return GroupBootstrap(out_metrics, out_curves, curve_dropped)


def bootstrap_metric(
    scores,
    outcomes,
    metric: Callable,
    plan: BootstrapPlan,
    stream_id: str,
    workers: int = 1,
) -> MetricEstimate:
    """Percentile bootstrap of ``metric(scores, outcomes)`` over one group's samples.

    Replicates on which the metric is undefined are dropped and counted; the
    estimate is flagged unreliable when the dropped fraction exceeds
    ``plan.drop_threshold``.
    """
    res = bootstrap_group(scores, outcomes, {"m": metric}, plan, stream_id, workers=workers)
    return res.metrics["m"]


def bootstrap_curve(
    scores,
    outcomes,
    curve: Callable,
    grid,
    plan: BootstrapPlan,
    stream_id: str,
    workers: int = 1,
) -> CurveSeries | None:
    """Pointwise percentile bands for ``curve`` on a fixed grid.

    The center line is the curve of the original sample evaluated on the
    grid; ``None`` if the curve is undefined on the original sample.
    """
    spec = CurveSpec(curve, np.asarray(grid, dtype=np.float64))
    res = bootstrap_group(scores, outcomes, {}, plan, stream_id, curves={"c": spec}, workers=workers)
    return res.curves["c"]
