"""Binned calibration error estimators and loess reliability curves.

Four estimators share one binning layer:

* ``ece`` - weighted mean absolute gap between mean prediction and mean
  outcome per bin (ACE when the bins are equal-mass),
* ``rmsce`` - weighted root mean squared gap,
* ``debiased_rmsce`` - rmsce with the per-bin sampling noise of the observed
  frequency removed,
* ``drmsce`` - debiased_rmsce on equal-mass bins whose count is chosen by
  :func:`max_monotonic_bins`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import CurveSeries
from .errors import UndefinedMetricError

EQUAL_WIDTH = "equal-width"
EQUAL_MASS = "equal-mass"
SCHEMES = (EQUAL_WIDTH, EQUAL_MASS)

DEFAULT_MIN_PER_BIN = 10


@dataclass(frozen=True, eq=False)
class BinnedCalibration:
    counts: np.ndarray
    mean_prediction: np.ndarray
    mean_outcome: np.ndarray
    total_count: int
    scheme: str
    n_bins_requested: int

    @property
    def n_bins(self) -> int:
        """Number of realized (nonempty) bins."""
        return int(self.counts.size)

    @property
    def bins(self) -> list[tuple[int, float, float]]:
        return list(zip(self.counts.tolist(), self.mean_prediction.tolist(), self.mean_outcome.tolist()))

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.total_count


def _as_arrays(scores, outcomes) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(outcomes, dtype=np.float64)
    if s.ndim != 1 or s.shape != y.shape:
        raise ValueError("scores and outcomes must be 1-d and of equal length")
    return s, y


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown binning scheme {scheme!r}; expected one of {SCHEMES}")


def _run_ends(s: np.ndarray) -> np.ndarray:
    # one past the last index of the run of equal scores holding each index
    ends = np.append(np.flatnonzero(s[1:] != s[:-1]) + 1, s.size)
    return np.repeat(ends, np.diff(np.concatenate(([0], ends))))


def _equal_mass_starts(s: np.ndarray, n_bins: int, run_end: np.ndarray | None = None) -> np.ndarray:
    # first index of each equal-mass bin over sorted s
    n = s.size
    q, r = divmod(n, n_bins)
    k = np.arange(1, n_bins)
    cuts = k * q + np.minimum(k, r)
    # never split a run of tied scores: push the cut past the run
    if run_end is not None:
        cuts = run_end[cuts - 1]
        keep = cuts < n
        keep[1:] &= cuts[1:] != cuts[:-1]
        return np.concatenate(([0], cuts[keep]))
    tied = s[cuts - 1] == s[cuts]
    if np.any(tied):
        cuts = np.where(tied, np.searchsorted(s, s[cuts - 1], side="right"), cuts)
        cuts = np.unique(cuts[cuts < n])
    return np.concatenate(([0], cuts))


def _bin_sorted(s: np.ndarray, y: np.ndarray, n_bins: int, scheme: str) -> BinnedCalibration:
    # s must be sorted ascending, y aligned with it
    n = s.size
    if scheme == EQUAL_WIDTH:
        idx = np.minimum((s * n_bins).astype(np.int64), n_bins - 1)
        counts = np.bincount(idx, minlength=n_bins)
        sum_s = np.bincount(idx, weights=s, minlength=n_bins)
        sum_y = np.bincount(idx, weights=y, minlength=n_bins)
        keep = counts > 0
        counts, sum_s, sum_y = counts[keep], sum_s[keep], sum_y[keep]
    else:
        starts = _equal_mass_starts(s, n_bins)
        counts = np.diff(np.concatenate((starts, [n])))
        sum_s = np.add.reduceat(s, starts)
        sum_y = np.add.reduceat(y, starts)
    return BinnedCalibration(
        counts=counts.astype(np.int64),
        mean_prediction=sum_s / counts,
        mean_outcome=sum_y / counts,
        total_count=n,
        scheme=scheme,
        n_bins_requested=n_bins,
    )


def _is_sorted(s: np.ndarray) -> bool:
    return s.size < 2 or bool(np.all(s[1:] >= s[:-1]))


def _sorted(scores, outcomes):
    s, y = _as_arrays(scores, outcomes)
    if _is_sorted(s):
        return s, y
    order = np.argsort(s, kind="stable")
    return s[order], y[order]


def bin_samples(scores, outcomes, n_bins: int, scheme: str = EQUAL_WIDTH) -> BinnedCalibration:
    """Partition samples into calibration bins.

    Equal-width bin ``b`` covers ``[b/n_bins, (b+1)/n_bins)`` (the last bin is
    closed) and empty bins are dropped.  Equal-mass bins split the score-sorted
    samples into runs whose sizes differ by at most one, except that tied
    scores always share a bin, so fewer bins than requested may result.
    """
    _check_scheme(scheme)
    s, y = _sorted(scores, outcomes)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if n_bins > s.size:
        raise ValueError(f"n_bins={n_bins} exceeds the number of samples ({s.size})")
    if s.size and (s[0] < 0 or s[-1] > 1):
        raise ValueError("scores must lie in [0, 1]")
    return _bin_sorted(s, y, n_bins, scheme)


def ece(binned: BinnedCalibration) -> float:
    if binned.n_bins == 0:
        raise ValueError("no bins")
    gap = np.abs(binned.mean_prediction - binned.mean_outcome)
    return float(np.sum(binned.weights * gap))


def rmsce(binned: BinnedCalibration) -> float:
    if binned.n_bins == 0:
        raise ValueError("no bins")
    gap = binned.mean_prediction - binned.mean_outcome
    return float(math.sqrt(np.sum(binned.weights * gap * gap)))


def debiased_rmsce(binned: BinnedCalibration) -> float:
    """Root mean squared calibration error with per-bin bias correction.

    Each bin's squared gap is reduced by ``ybar * (1 - ybar) / (n_b - 1)``,
    the unbiased estimate of the variance of the bin's observed frequency.
    The weighted sum is clamped at zero before taking the root.
    """
    if binned.n_bins == 0:
        raise ValueError("no bins")
    n_b = binned.counts
    if np.any(n_b < 2):
        raise UndefinedMetricError("bin-too-small", "debiasing needs at least 2 samples per bin")
    ybar = binned.mean_outcome
    gap = binned.mean_prediction - ybar
    term = gap * gap - ybar * (1.0 - ybar) / (n_b - 1)
    return float(math.sqrt(max(0.0, float(np.sum(binned.weights * term)))))


def _is_monotonic(b: BinnedCalibration, min_per_bin: int) -> bool:
    return bool(np.all(np.diff(b.mean_outcome) >= 0) and np.all(b.counts >= min_per_bin))


def max_monotonic_bins(
    scores,
    outcomes,
    min_per_bin: int = DEFAULT_MIN_PER_BIN,
    scheme: str = EQUAL_MASS,
    search: str = "binary",
) -> int:
    """Largest bin count whose calibration curve is nondecreasing.

    Candidates range over ``1 .. n // min_per_bin``; a candidate qualifies
    when the mean outcomes of its realized bins never decrease and every
    realized bin holds at least ``min_per_bin`` samples.

    ``search="binary"`` bisects the range as if qualification were monotone
    in the bin count.  It usually is, but not always, so the result can be
    below the true maximum.  ``search="linear"`` checks every candidate from
    the top down and returns the exact maximum.
    """
    _check_scheme(scheme)
    if min_per_bin < 1:
        raise ValueError("min_per_bin must be >= 1")
    s, y = _sorted(scores, outcomes)
    n = s.size
    if n < min_per_bin:
        raise UndefinedMetricError(
            "too-few-samples", f"need at least {min_per_bin} samples, got {n}"
        )
    hi = n // min_per_bin

    if scheme == EQUAL_MASS:
        # outcome sums from a prefix sum are exact (0/1 outcomes), so this
        # agrees with full binning at O(k) cost per candidate
        cy = np.concatenate(([0.0], np.cumsum(y)))
        bounds_end = np.array([n])
        run_end = _run_ends(s)

        def ok(k: int) -> bool:
            bounds = np.concatenate((_equal_mass_starts(s, k, run_end), bounds_end))
            counts = bounds[1:] - bounds[:-1]
            if counts.min() < min_per_bin:
                return False
            sums = cy[bounds]
            mean_y = (sums[1:] - sums[:-1]) / counts
            return bool(np.all(mean_y[1:] >= mean_y[:-1]))
    else:

        def ok(k: int) -> bool:
            return _is_monotonic(_bin_sorted(s, y, k, scheme), min_per_bin)

    if search == "linear":
        for k in range(hi, 1, -1):
            if ok(k):
                return k
        return 1
    if search != "binary":
        raise ValueError(f"unknown search {search!r}")
    lo = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class CalibrationEstimatorConfig:
    """One calibration metric: binning scheme, estimator and bin-count policy.

    ``bin_policy`` is ``"fixed"`` (use ``n_bins``) or ``"adaptive"`` (bin
    count search with at least ``min_per_bin`` samples per bin).
    """

    binning: str = EQUAL_MASS
    estimator: str = "debiased-rmsce"
    bin_policy: str = "adaptive"
    n_bins: int = 15
    min_per_bin: int = DEFAULT_MIN_PER_BIN
    label: str | None = None

    ESTIMATORS = ("ece-l1", "rmsce", "debiased-rmsce")

    def __post_init__(self):
        _check_scheme(self.binning)
        if self.estimator not in self.ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.bin_policy not in ("fixed", "adaptive"):
            raise ValueError(f"unknown bin policy {self.bin_policy!r}")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        if self.min_per_bin < 2:
            raise ValueError("min_per_bin must be >= 2")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        policy = "bcs" if self.bin_policy == "adaptive" else str(self.n_bins)
        return f"{self.estimator}[{self.binning},{policy}]"

    def to_dict(self) -> dict:
        return {
            "binning": self.binning,
            "estimator": self.estimator,
            "bin_policy": self.bin_policy,
            "n_bins": self.n_bins,
            "min_per_bin": self.min_per_bin,
            "label": self.name,
        }

    def evaluate(self, scores, outcomes, search: str = "binary") -> tuple[float, int]:
        """Return ``(value, realized_bin_count)``."""
        s, y = _sorted(scores, outcomes)
        n = s.size
        if self.bin_policy == "adaptive":
            k = max_monotonic_bins(s, y, self.min_per_bin, self.binning, search)
        else:
            k = self.n_bins
            if k > n:
                raise UndefinedMetricError("too-few-samples", f"{k} bins need at least {k} samples")
        binned = _bin_sorted(s, y, k, self.binning)
        fn = {"ece-l1": ece, "rmsce": rmsce, "debiased-rmsce": debiased_rmsce}[self.estimator]
        return fn(binned), binned.n_bins

    def __call__(self, scores, outcomes) -> float:
        return self.evaluate(scores, outcomes)[0]


DRMSCE = CalibrationEstimatorConfig(label="drmsce")


def drmsce(scores, outcomes, min_per_bin: int = DEFAULT_MIN_PER_BIN, search: str = "binary") -> float:
    """Debiased RMS calibration error with adaptive equal-mass bin count."""
    cfg = CalibrationEstimatorConfig(min_per_bin=min_per_bin, label="drmsce")
    return cfg.evaluate(scores, outcomes, search)[0]


# ---------------------------------------------------------------------------
# loess reliability curve

DEFAULT_SPAN = 0.75
DEFAULT_GRID_SIZE = 101
DEFAULT_MAX_SUPPORT = 256


def _aggregate(s: np.ndarray, y: np.ndarray, max_support: int):
    """Collapse samples onto support points: (x, mean y, weight)."""
    if not _is_sorted(s):
        order = np.argsort(s, kind="stable")
        s, y = s[order], y[order]
    starts = np.concatenate(([0], np.flatnonzero(s[1:] != s[:-1]) + 1))
    if starts.size <= max_support:
        counts = np.diff(np.append(starts, s.size)).astype(np.float64)
        return s[starts], np.add.reduceat(y, starts) / counts, counts
    lo, hi = s.min(), s.max()
    cell = np.minimum(((s - lo) / (hi - lo) * max_support).astype(np.int64), max_support - 1)
    w = np.bincount(cell, minlength=max_support).astype(np.float64)
    sx = np.bincount(cell, weights=s, minlength=max_support)
    sy = np.bincount(cell, weights=y, minlength=max_support)
    keep = w > 0
    return sx[keep] / w[keep], sy[keep] / w[keep], w[keep]


def _neighbourhood_radius(x: np.ndarray, w: np.ndarray, grid: np.ndarray, mass: float) -> np.ndarray:
    # smallest h with sum(w[|x - g| <= h]) >= mass, by bisection per grid point
    cw = np.concatenate(([0.0], np.cumsum(w)))
    lo = np.zeros_like(grid)
    hi = np.maximum(np.abs(grid - x[0]), np.abs(grid - x[-1]))
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        inside = cw[np.searchsorted(x, grid + mid, side="right")] - cw[np.searchsorted(x, grid - mid, side="left")]
        enough = inside >= mass
        hi = np.where(enough, mid, hi)
        lo = np.where(enough, lo, mid)
    return hi


def _local_linear(x, ybar, w, grid, span) -> np.ndarray:
    total = w.sum()
    mass = max(span * total, min(2.0, total))
    h = _neighbourhood_radius(x, w, grid, mass)
    dx = x[None, :] - grid[:, None]
    zero_h = h <= 0
    u = np.abs(dx)
    u /= np.where(zero_h, 1.0, h)[:, None]
    np.minimum(u, 1.0, out=u)
    # tricube: (1 - u^3)^3, zero at u >= 1
    k = u * u
    k *= u
    np.subtract(1.0, k, out=k)
    k *= k * k
    k *= w[None, :]
    if np.any(zero_h):
        k[zero_h] = (dx[zero_h] == 0) * w[None, :]
    ones = np.ones_like(x)
    s0 = k @ ones
    # neighbourhood collapsed onto the nearest support point(s)
    empty = s0 <= 0
    if np.any(empty):
        dm = np.abs(dx[empty])
        k[empty] = (dm <= dm.min(axis=1, keepdims=True)) * w[None, :]
        s0 = k @ ones
    # sums against the same weights as the outcome sums, so a constant
    # outcome gives a mean equal to it and an exactly zero slope
    xm = ((k * dx) @ ones) / s0
    ym = (k @ ybar) / s0
    dxm = dx - xm[:, None]
    kdm = k * dxm
    sxx = np.einsum("ij,ij->i", kdm, dxm)
    sxy = kdm @ ybar - (kdm @ ones) * ym
    flat = sxx <= 1e-14 * s0
    slope = np.where(flat, 0.0, sxy / np.where(flat, 1.0, sxx))
    # dx is measured from the grid point, so the fit there is at dx = 0
    return ym - slope * xm


def reliability_curve(
    scores,
    outcomes,
    span: float = DEFAULT_SPAN,
    grid_size: int = DEFAULT_GRID_SIZE,
    grid=None,
    max_support: int = DEFAULT_MAX_SUPPORT,
) -> CurveSeries:
    """Loess (local linear, tricube) estimate of P(Y=1 | score).

    Evaluated on ``grid`` if given, else on ``grid_size`` evenly spaced points
    over the observed score range.  Samples with identical scores are merged
    first, which leaves the fit unchanged; with more than ``max_support``
    distinct scores they are pooled into that many equal-width cells instead,
    an approximation that keeps large groups cheap.
    """
    s, y = _as_arrays(scores, outcomes)
    if s.size < 10:
        raise UndefinedMetricError("too-few-samples", "reliability curve needs at least 10 samples")
    if not 0 < span <= 1:
        raise ValueError("span must be in (0, 1]")
    if grid is None:
        if grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        grid = np.linspace(s.min(), s.max(), grid_size)
    grid = np.asarray(grid, dtype=np.float64)
    x, ybar, w = _aggregate(s, y, max_support)
    fitted = np.clip(_local_linear(x, ybar, w, grid, span), 0.0, 1.0)
    return CurveSeries(grid, fitted, axis_labels=("predicted risk", "observed frequency"))
