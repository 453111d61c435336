"""Group representation in risk-ranked selections.

A selection at threshold ``tau`` takes everyone with ``score >= tau``.  A
group's normalized representation at ``tau`` is its share of the selected
set divided by its share of all positives; expected under-representation
(EUR) averages ``min(ratio, 1)`` over thresholds drawn from the empirical
score distribution of the whole evaluation set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import CurveSeries
from .data import Dataset, GroupIndex
from .errors import UndefinedMetricError


@dataclass(frozen=True)
class EURResult:
    value: float
    n_draws: int
    n_skipped: int


class SelectionSweep:
    """Nested selections of one scored population, shared across groups.

    Built once per population (or bootstrap replicate); per-group counts are
    derived from a boolean membership mask aligned with the input arrays.
    """

    def __init__(self, scores, outcomes, presorted: bool = False):
        s = np.asarray(scores, dtype=np.float64)
        y = np.asarray(outcomes).astype(bool)
        if s.ndim != 1 or s.shape != y.shape or s.size == 0:
            raise ValueError("scores and outcomes must be nonempty 1-d arrays of equal length")
        if presorted:
            self.order = None
        else:
            self.order = np.argsort(s, kind="stable")
            s, y = s[self.order], y[self.order]
        self.sorted_scores = s
        self.sorted_outcomes = y
        self.n = s.size
        self.n_positive = int(y.sum())
        starts = np.concatenate(([0], np.flatnonzero(s[1:] != s[:-1]) + 1))
        # position of the first sample tied with each sample (ascending order)
        self._first = np.repeat(starts, np.diff(np.append(starts, s.size)))
        self._starts = starts
        self.thresholds = s[starts]
        self.selected_count = self.n - starts

    def _sorted_mask(self, member) -> np.ndarray:
        m = np.asarray(member, dtype=bool)
        if m.shape != (self.n,):
            raise ValueError("membership mask does not match the population")
        return m if self.order is None else m[self.order]

    def group_counts(self, member) -> tuple[np.ndarray, int, int]:
        """Selected group members at every threshold, group size, group positives."""
        m = self._sorted_mask(member)
        cum = np.concatenate(([0], np.cumsum(m)))
        size = int(cum[-1])
        return size - cum[self._starts], size, int(np.count_nonzero(m & self.sorted_outcomes))

    def _targets(self, m) -> tuple[int, int]:
        if self.n_positive == 0:
            raise UndefinedMetricError("no-positives", "population has no positive outcomes")
        g_pos = int(np.count_nonzero(m & self.sorted_outcomes))
        if g_pos == 0:
            raise UndefinedMetricError("group-no-positives", "group has no positive outcomes")
        return g_pos, self.n_positive

    def target_representation(self, member) -> float:
        m = self._sorted_mask(member)
        g_pos, pos = self._targets(m)
        return g_pos / pos

    def eur(self, member, threshold_range=None, exact: bool = True) -> EURResult:
        """Expected under-representation of the group given by ``member``.

        Every sample contributes one threshold draw at its own score; draws
        outside ``threshold_range`` are excluded and the rest renormalized.
        With ``exact=True`` the per-draw terms are summed with ``math.fsum``.
        """
        m = self._sorted_mask(member)
        g_pos, pos = self._targets(m)
        s = self.sorted_scores
        cum = np.concatenate(([0], np.cumsum(m)))
        first = self._first
        keep = None
        if threshold_range is not None:
            lo, hi = threshold_range
            keep = (s >= lo) & (s <= hi)
            first = first[keep]
        selected = self.n - first
        selected_g = cum[-1] - cum[first]
        n_draws = int(first.size) if keep is None else int(np.count_nonzero(keep))
        nonempty = selected > 0
        n_skipped = int(n_draws - np.count_nonzero(nonempty))
        used = n_draws - n_skipped
        if used == 0:
            raise UndefinedMetricError("no-thresholds", "no threshold draw selects anyone")
        num = selected_g[nonempty].astype(np.int64) * pos
        den = selected[nonempty].astype(np.int64) * g_pos
        terms = np.minimum(num / den, 1.0)
        total = math.fsum(terms.tolist()) if exact else float(terms.sum())
        return EURResult(total / used, n_draws, n_skipped)

    def representation_ratio(self, member, thresholds) -> np.ndarray:
        """Normalized representation at arbitrary thresholds; NaN where nobody is selected."""
        m = self._sorted_mask(member)
        g_pos, pos = self._targets(m)
        tau = np.asarray(thresholds, dtype=np.float64)
        first = np.searchsorted(self.sorted_scores, tau, side="left")
        cum = np.concatenate(([0], np.cumsum(m)))
        selected = self.n - first
        selected_g = cum[-1] - cum[first]
        out = np.full(tau.shape, np.nan)
        ok = selected > 0
        out[ok] = (selected_g[ok] * pos) / (selected[ok] * g_pos)
        return out

    def representation_curve(self, member, threshold_range=None) -> CurveSeries:
        tau = self.thresholds
        if threshold_range is not None:
            lo, hi = threshold_range
            tau = tau[(tau >= lo) & (tau <= hi)]
        y = self.representation_ratio(member, tau)
        ok = ~np.isnan(y)
        return CurveSeries(tau[ok], y[ok], axis_labels=("threshold", "normalized representation"))


def _member(dataset: Dataset, group: GroupIndex) -> np.ndarray:
    m = np.zeros(len(dataset), dtype=bool)
    m[group.row_indices] = True
    return m


def target_representation(dataset: Dataset, group: GroupIndex) -> float:
    """Share of all positives that belong to the group, p(G | Y=1)."""
    pos = int(dataset.outcomes.sum())
    if pos == 0:
        raise UndefinedMetricError("no-positives", "dataset has no positive outcomes")
    return group.positive_count / pos


def representation_curve(dataset: Dataset, group: GroupIndex, threshold_range=None) -> CurveSeries:
    sweep = SelectionSweep(dataset.scores, dataset.outcomes)
    return sweep.representation_curve(_member(dataset, group), threshold_range)


def eur(dataset: Dataset, group: GroupIndex, threshold_range=None) -> float:
    sweep = SelectionSweep(dataset.scores, dataset.outcomes)
    return sweep.eur(_member(dataset, group), threshold_range).value


def eur_detail(dataset: Dataset, group: GroupIndex, threshold_range=None) -> EURResult:
    sweep = SelectionSweep(dataset.scores, dataset.outcomes)
    return sweep.eur(_member(dataset, group), threshold_range)


class WeightedSweep:
    """Selections of a bootstrap replicate given as counts over a base population.

    ``counts[r]`` is how often base sample ``r`` (in ascending score order)
    appears in the replicate.  Group members are passed as sorted positions
    into that base order, so per-group work scales with the group size rather
    than the population size.  Values match :class:`SelectionSweep` on the
    materialized replicate up to float summation order.
    """

    def __init__(self, base: SelectionSweep, counts):
        cnt = np.asarray(counts, dtype=np.int64)
        if cnt.shape != (base.n,):
            raise ValueError("counts do not match the base population")
        self.base = base
        self.counts = cnt
        self.n = int(cnt.sum())
        offset = np.concatenate(([0], np.cumsum(cnt)))
        # replicate position of the first sample tied with base sample r
        self._first_pos = offset[base._first]
        self._offset = offset
        selected = self.n - self._first_pos
        a = np.where(cnt > 0, cnt / np.where(selected > 0, selected, 1), 0.0)
        self._h = np.concatenate(([0.0], np.cumsum(a)))
        self.n_positive = int(cnt[base.sorted_outcomes].sum())
        # _below[v] = number of draws with first_pos < v, i.e. searchsorted(first_pos, v)
        self._below = np.concatenate(([0], np.cumsum(np.bincount(self._first_pos, minlength=self.n + 1))))
        # one past the last base sample tied with r; depends on the base only
        run_end = getattr(base, "_run_end", None)
        if run_end is None:
            run_end = np.repeat(np.append(base._starts[1:], base.n), np.diff(np.append(base._starts, base.n)))
            base._run_end = run_end
        self._run_end = run_end

    def _draw_range(self, threshold_range):
        if threshold_range is None:
            return 0, self.base.n
        lo, hi = threshold_range
        s = self.base.sorted_scores
        return int(np.searchsorted(s, lo, "left")), int(np.searchsorted(s, hi, "right"))

    def group(self, members, threshold_range=None, thresholds=None):
        """``(eur, ratio)`` for the group at base positions ``members`` (sorted).

        ``ratio`` is the normalized representation at ``thresholds`` (or
        ``None`` when not requested).
        """
        members = np.asarray(members, dtype=np.int64)
        if self.n_positive == 0:
            raise UndefinedMetricError("no-positives", "population has no positive outcomes")
        mc = self.counts[members]
        g_pos = int(mc[self.base.sorted_outcomes[members]].sum())
        if g_pos == 0:
            raise UndefinedMetricError("group-no-positives", "group has no positive outcomes")
        cm = np.concatenate(([0], np.cumsum(mc)))
        scale = self.n_positive / g_pos
        r_lo, r_hi = self._draw_range(threshold_range)
        n_draws = int(self._offset[r_hi] - self._offset[r_lo])
        if n_draws == 0:
            raise UndefinedMetricError("no-thresholds", "no threshold draw selects anyone")
        # draws r in [b[j], b[j+1]) see the same selected group count c[j]
        b = np.concatenate(([0], self._run_end[members], [self.base.n]))
        np.clip(b, r_lo, r_hi, out=b)
        k = (cm[-1] - cm) * scale
        # the ratio reaches the cap once first_pos >= n - k; first_pos is
        # integral, so the ceiling gives the same split with integer queries
        q = np.clip(np.ceil(self.n - k), 0, self.n).astype(np.int64)
        split = self._below[q]
        np.clip(split, b[:-1], b[1:], out=split)
        h = self._h
        capped = np.sum(self._offset[b[1:]] - self._offset[split])
        total = np.dot(k, h[split] - h[b[:-1]]) + capped
        eur = float(total / n_draws)
        ratio = None
        if thresholds is not None:
            tau = np.asarray(thresholds, dtype=np.float64)
            first = np.searchsorted(self.base.sorted_scores, tau, side="left")
            selected = self.n - self._offset[first]
            selected_g = cm[-1] - cm[np.searchsorted(members, first, side="left")]
            ratio = np.full(tau.shape, np.nan)
            ok = selected > 0
            ratio[ok] = (selected_g[ok] * scale) / selected[ok]
        return eur, ratio

    def eur(self, members, threshold_range=None) -> float:
        """EUR for the group whose base positions are ``members`` (sorted)."""
        return self.group(members, threshold_range)[0]

    def representation_ratio(self, members, thresholds) -> np.ndarray:
        return self.group(members, None, thresholds)[1]
