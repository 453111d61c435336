"""Ordered (x, y) point series with optional pointwise confidence bands."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CurveSeries:
    x: np.ndarray
    y: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    axis_labels: tuple[str, str] = ("x", "y")

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).copy()
        y = np.asarray(self.y, dtype=np.float64).copy()
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if np.any(np.diff(x) < 0):
            raise ValueError("x must be nondecreasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if (self.lower is None) != (self.upper is None):
            raise ValueError("lower and upper bands go together")
        if self.lower is not None:
            lo = np.asarray(self.lower, dtype=np.float64).copy()
            hi = np.asarray(self.upper, dtype=np.float64).copy()
            if lo.shape != x.shape or hi.shape != x.shape:
                raise ValueError("bands must match the points")
            ok = np.isnan(lo) | np.isnan(hi) | np.isnan(y) | ((lo <= y) & (y <= hi))
            if not np.all(ok):
                raise ValueError("bands must enclose the curve")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "axis_labels", tuple(self.axis_labels))

    def __len__(self) -> int:
        return int(self.x.size)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def has_bands(self) -> bool:
        return self.lower is not None

    def with_bands(self, lower, upper) -> "CurveSeries":
        return CurveSeries(self.x, self.y, lower, upper, self.axis_labels)

    def trapezoid(self) -> float:
        if self.x.size < 2:
            return 0.0
        return float(np.sum(np.diff(self.x) * (self.y[1:] + self.y[:-1]) / 2.0))

    def equals(self, other: "CurveSeries") -> bool:
        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and bool(np.all((a == b) | (np.isnan(a) & np.isnan(b))))

        return (
            same(self.x, other.x)
            and same(self.y, other.y)
            and same(self.lower, other.lower)
            and same(self.upper, other.upper)
            and self.axis_labels == other.axis_labels
        )


def interpolate_on_grid(curve: CurveSeries, grid: np.ndarray) -> np.ndarray:
    """Evaluate the curve's polyline at ``grid``.

    At an x carrying a vertical segment the topmost point wins (right
    continuity).  Grid values outside the curve's x-range are NaN.
    """
    x, y = curve.x, curve.y
    grid = np.asarray(grid, dtype=np.float64)
    out = np.full(grid.shape, np.nan)
    if x.size == 0:
        return out
    i = np.searchsorted(x, grid, side="right") - 1
    inside = (i >= 0) & (grid <= x[-1])
    i = i[inside]
    g = grid[inside]
    last = i == x.size - 1
    j = np.minimum(i + 1, x.size - 1)
    dx = x[j] - x[i]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(last | (dx == 0), 0.0, (g - x[i]) / np.where(dx == 0, 1.0, dx))
    out[inside] = y[i] + t * (y[j] - y[i])
    return out


def _fmt(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    return format(float(v), ".17g")


def _parse(text: str) -> float:
    return math.nan if text == "NA" else float(text)


def curve_to_csv(curve: CurveSeries) -> str:
    """Serialize as ``x,y,lower,upper`` rows with 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    banded = "yes" if curve.has_bands else "no"
    w.writerow([f"# x={curve.axis_labels[0]}", f"y={curve.axis_labels[1]}", f"bands={banded}"])
    w.writerow(["x", "y", "lower", "upper"])
    lo = curve.lower if curve.lower is not None else [None] * len(curve)
    hi = curve.upper if curve.upper is not None else [None] * len(curve)
    for xv, yv, lv, hv in zip(curve.x, curve.y, lo, hi):
        w.writerow([_fmt(xv), _fmt(yv), "" if lv is None else _fmt(lv), "" if hv is None else _fmt(hv)])
    return buf.getvalue()


def curve_from_csv(text: str) -> CurveSeries:
    rows = list(csv.reader(io.StringIO(text)))
    xlab = rows[0][0].split("=", 1)[1]
    ylab = rows[0][1].split("=", 1)[1]
    body = rows[2:]
    x = np.array([_parse(r[0]) for r in body], dtype=np.float64)
    y = np.array([_parse(r[1]) for r in body], dtype=np.float64)
    banded = rows[0][2] == "bands=yes"
    if banded:
        lo = np.array([_parse(r[2]) for r in body], dtype=np.float64)
        hi = np.array([_parse(r[3]) for r in body], dtype=np.float64)
        return CurveSeries(x, y, lo, hi, (xlab, ylab))
    return CurveSeries(x, y, axis_labels=(xlab, ylab))
