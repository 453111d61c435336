"""ROC / AUROC and precision-recall-gain / AUPRG.

All sweeps use the decision rule ``score >= threshold`` over the distinct
score values; tied scores enter the selected set together.
"""

from __future__ import annotations

import numpy as np

from .curves import CurveSeries
from .errors import UndefinedMetricError


def _prepare(scores, outcomes):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(outcomes)
    if s.ndim != 1 or s.shape != y.shape:
        raise ValueError("scores and outcomes must be 1-d and of equal length")
    y = y.astype(bool)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise UndefinedMetricError("single-class", "need at least one positive and one negative")
    return s, y, n_pos, y.size - n_pos


def _is_sorted(s) -> bool:
    return s.size < 2 or bool(np.all(s[1:] >= s[:-1]))


def _runs(s, y):
    """Ascending distinct scores with positive / negative counts per value."""
    if not _is_sorted(s):
        order = np.argsort(s, kind="stable")
        s, y = s[order], y[order]
    starts = np.concatenate(([0], np.flatnonzero(s[1:] != s[:-1]) + 1))
    counts = np.diff(np.append(starts, s.size))
    pos = np.add.reduceat(y.astype(np.int64), starts)
    return s[starts], pos, counts - pos


def _sweep(s, y):
    """Cumulative (tp, fp) after each distinct threshold, highest first."""
    values, pos, neg = _runs(s, y)
    tp = np.cumsum(pos[::-1])
    fp = np.cumsum(neg[::-1])
    return tp, fp, values[::-1]


def _roc_from_sweep(tp, fp, n_pos, n_neg) -> CurveSeries:
    fpr = np.concatenate(([0.0], fp / n_neg))
    tpr = np.concatenate(([0.0], tp / n_pos))
    return CurveSeries(fpr, tpr, axis_labels=("false positive rate", "true positive rate"))


def _auroc_from_sweep(tp, fp, n_pos, n_neg) -> float:
    # Mann-Whitney U over tie runs, kept in integers (doubled to hold the halves):
    # each positive beats the negatives scored below it, ties count one half
    pos = np.diff(tp, prepend=0)
    neg = np.diff(fp, prepend=0)
    twice_u = int(np.dot(pos, 2 * (n_neg - fp) + neg))
    return twice_u / (2 * n_pos * n_neg)


def _prg_from_sweep(tp, fp, n_pos, n_neg) -> CurveSeries:
    pi = n_pos / (n_pos + n_neg)
    tp = np.concatenate(([0], tp)).astype(np.float64)
    fp = np.concatenate(([0], fp)).astype(np.float64)
    target = pi * n_pos  # tp count at which recall == base rate
    j = int(np.searchsorted(tp, target, side="left"))  # first point with tp >= target
    pts_tp, pts_fp = tp[j:], fp[j:]
    if tp[j] > target:
        t = (target - tp[j - 1]) / (tp[j] - tp[j - 1])
        c_fp = fp[j - 1] + t * (fp[j] - fp[j - 1])
        pts_tp = np.concatenate(([target], pts_tp))
        pts_fp = np.concatenate(([c_fp], pts_fp))
    # (prec - pi) / ((1 - pi) prec) and the recall analogue, in count form
    odds = n_pos / n_neg
    prec_gain = 1.0 - odds * (pts_fp / pts_tp)
    rec_gain = 1.0 - odds * ((n_pos - pts_tp) / pts_tp)
    # the first point sits at recall == base rate by construction
    rec_gain[0] = 0.0
    rec_gain = np.minimum(rec_gain, 1.0)
    rec_gain = np.maximum.accumulate(rec_gain)
    return CurveSeries(rec_gain, prec_gain, axis_labels=("recall gain", "precision gain"))


def roc_curve(scores, outcomes) -> CurveSeries:
    """ROC staircase from (0, 0), one vertex per distinct score threshold."""
    s, y, n_pos, n_neg = _prepare(scores, outcomes)
    tp, fp, _ = _sweep(s, y)
    return _roc_from_sweep(tp, fp, n_pos, n_neg)


def auroc(scores, outcomes) -> float:
    """Concordance probability, ties between classes counting one half."""
    s, y, n_pos, n_neg = _prepare(scores, outcomes)
    tp, fp, _ = _sweep(s, y)
    return _auroc_from_sweep(tp, fp, n_pos, n_neg)


def prg_curve(scores, outcomes) -> CurveSeries:
    """Precision-gain versus recall-gain over the nonnegative recall-gain range.

    The curve starts where recall equals the base rate (recall gain 0).  That
    point is found by interpolating linearly in (tp, fp) count space between
    the two neighbouring operating points, the nothing-selected origin
    included; along such a segment precision follows the true
    mixture of the two operating points.
    """
    s, y, n_pos, n_neg = _prepare(scores, outcomes)
    tp, fp, _ = _sweep(s, y)
    return _prg_from_sweep(tp, fp, n_pos, n_neg)


def _polyline_area(x: np.ndarray, y: np.ndarray) -> float:
    # trapezoid over segments of positive width, summed in a form that
    # telescopes exactly for a flat curve (perfect ranking -> exactly 1.0)
    if x.size < 2:
        return 0.0
    dx = np.diff(x)
    seg = np.flatnonzero(dx > 0)
    if seg.size == 0:
        return 0.0
    a = (y[seg] + y[seg + 1]) / 2.0
    xs, xe = x[seg], x[seg + 1]
    area = xe[-1] * a[-1] - xs[0] * a[0]
    if seg.size > 1:
        area -= float(np.sum(xs[1:] * np.diff(a)))
    return float(area)


def auprg(scores, outcomes) -> float:
    """Area under the precision-recall-gain curve over recall gain in [0, 1]."""
    curve = prg_curve(scores, outcomes)
    return _polyline_area(curve.x, curve.y)


def discrimination_summary(scores, outcomes) -> tuple[dict, dict]:
    """AUROC, AUPRG and both curves from a single threshold sweep.

    Returns ``({"auroc": .., "auprg": ..}, {"roc": CurveSeries, "prg": CurveSeries})``.
    """
    s, y, n_pos, n_neg = _prepare(scores, outcomes)
    tp, fp, _ = _sweep(s, y)
    prg = _prg_from_sweep(tp, fp, n_pos, n_neg)
    metrics = {
        "auroc": _auroc_from_sweep(tp, fp, n_pos, n_neg),
        "auprg": _polyline_area(prg.x, prg.y),
    }
    return metrics, {"roc": _roc_from_sweep(tp, fp, n_pos, n_neg), "prg": prg}
