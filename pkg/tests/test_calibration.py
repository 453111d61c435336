import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import corrected_sum_rmsce, equal_mass_bins, equal_width_bins, plain_ece, plain_rmsce
from riskaudit.calibration import (
    EQUAL_MASS,
    EQUAL_WIDTH,
    CalibrationEstimatorConfig,
    bin_samples,
    debiased_rmsce,
    drmsce,
    ece,
    max_monotonic_bins,
    reliability_curve,
    rmsce,
)
from riskaudit.errors import UndefinedMetricError
from riskaudit.synthetic import generate_calibration_stream

SEP_S = [0.2, 0.2, 0.8, 0.8]
SEP_Y = [0, 0, 1, 1]


def test_equal_width_two_bins():
    b = bin_samples(SEP_S, SEP_Y, 2, EQUAL_WIDTH)
    assert b.counts.tolist() == [2, 2]
    assert b.mean_prediction.tolist() == [0.2, 0.8]
    assert b.total_count == 4


def test_equal_mass_split_at_median():
    b = bin_samples([0.1, 0.2, 0.3, 0.9], [0, 0, 1, 1], 2, EQUAL_MASS)
    assert b.counts.tolist() == [2, 2]
    assert b.mean_prediction[0] == pytest.approx(0.15)


def test_equal_mass_never_splits_ties():
    b = bin_samples([0.5] * 4, [1, 0, 1, 0], 2, EQUAL_MASS)
    assert b.counts.tolist() == [4]
    assert b.n_bins_requested == 2


def test_empty_equal_width_bins_dropped_total_kept():
    b = bin_samples([0.05, 0.06, 0.95], [0, 0, 1], 3, EQUAL_WIDTH)
    assert b.counts.tolist() == [2, 1]
    assert b.total_count == 3


@pytest.mark.parametrize("k", [0, 5])
def test_bin_count_errors(k):
    with pytest.raises(ValueError):
        bin_samples([0.1, 0.2, 0.3], [0, 1, 0], k)


def test_hand_values_two_bin_separated_case():
    b = bin_samples(SEP_S, SEP_Y, 2, EQUAL_WIDTH)
    assert ece(b) == pytest.approx(0.2, abs=1e-15)
    assert rmsce(b) == pytest.approx(0.2, abs=1e-15)
    # pure bins: the correction vanishes
    assert debiased_rmsce(b) == pytest.approx(0.2, abs=1e-15)


def test_perfect_binned_calibration_is_zero():
    b = bin_samples([0.0, 0.0, 1.0, 1.0], [0, 0, 1, 1], 2, EQUAL_WIDTH)
    assert ece(b) == 0.0 and rmsce(b) == 0.0


def test_maximal_error():
    assert ece(bin_samples([1.0] * 20, [0] * 20, 15)) == 1.0


@pytest.mark.parametrize("outcomes", [[1, 0, 1, 0], [1, 1, 1, 0]])
def test_debiased_single_bin_clamps_to_zero(outcomes):
    assert debiased_rmsce(bin_samples([0.5] * 4, outcomes, 1)) == 0.0


def test_debiased_rejects_singleton_bins():
    with pytest.raises(UndefinedMetricError) as err:
        debiased_rmsce(bin_samples([0.1, 0.9], [0, 1], 2))
    assert err.value.reason == "bin-too-small"


def test_debiased_matches_loop_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(4, 300))
        s = rng.random(n) if rng.random() < 0.5 else rng.integers(0, 8, n) / 7
        y = (rng.random(n) < s).astype(int)
        k = int(rng.integers(1, max(2, n // 4)))
        for scheme, oracle_bins in ((EQUAL_WIDTH, equal_width_bins), (EQUAL_MASS, equal_mass_bins)):
            bins = oracle_bins(s.tolist(), y.tolist(), k)
            binned = bin_samples(s, y, k, scheme)
            assert binned.counts.tolist() == [len(b) for b in bins]
            assert ece(binned) == pytest.approx(plain_ece(bins, n), abs=1e-12)
            assert rmsce(binned) == pytest.approx(plain_rmsce(bins, n), abs=1e-12)
            if min(len(b) for b in bins) >= 2:
                assert debiased_rmsce(binned) == pytest.approx(corrected_sum_rmsce(bins, n), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(20, 200), st.integers(1, 8))
def test_estimators_in_unit_interval_and_permutation_invariant(seed, n, k):
    rng = np.random.default_rng(seed)
    s = rng.random(n)
    y = rng.integers(0, 2, n)
    perm = rng.permutation(n)
    for scheme in (EQUAL_WIDTH, EQUAL_MASS):
        a = bin_samples(s, y, k, scheme)
        b = bin_samples(s[perm], y[perm], k, scheme)
        for fn in (ece, rmsce):
            assert 0.0 <= fn(a) <= 1.0
            assert fn(a) == pytest.approx(fn(b), abs=1e-14)
        if a.counts.min() >= 2:
            assert debiased_rmsce(a) <= rmsce(a) + 1e-15


def test_bcs_small_cases():
    s = np.arange(20) * 0.05 + 0.025
    up = (np.arange(20) >= 10).astype(int)
    assert max_monotonic_bins(s[:10], up[:10]) == 1
    assert max_monotonic_bins(s, up) == 2
    assert max_monotonic_bins(s, 1 - up) == 1
    with pytest.raises(UndefinedMetricError):
        max_monotonic_bins(s[:9], up[:9])


def test_bcs_bound_and_linear_is_exact(rng):
    for _ in range(100):
        n = int(rng.integers(10, 400))
        s, y = generate_calibration_stream(n, "perfect", rng)
        kb = max_monotonic_bins(s, y)
        kl = max_monotonic_bins(s, y, search="linear")
        assert 1 <= kb <= kl <= n // 10
        # the linear result qualifies and no larger count does
        for k in range(kl, n // 10 + 1):
            b = bin_samples(s, y, k, EQUAL_MASS)
            ok = bool(np.all(np.diff(b.mean_outcome) >= 0) and b.counts.min() >= 10)
            assert ok == (k == kl)


def test_drmsce_base_rate_predictor_near_zero(rng):
    y = (rng.random(2000) < 0.3).astype(int)
    assert drmsce(np.full(2000, y.mean()), y) < 1e-12


def test_estimator_config_realized_bins():
    s = np.linspace(0.01, 0.99, 200)
    y = (s > 0.5).astype(int)
    cfg = CalibrationEstimatorConfig(EQUAL_MASS, "debiased-rmsce", "adaptive", min_per_bin=10)
    value, bins = cfg.evaluate(s, y)
    assert bins == max_monotonic_bins(s, y)
    assert value == drmsce(s, y)
    fixed = CalibrationEstimatorConfig(EQUAL_WIDTH, "ece-l1", "fixed", 15, label="ece")
    assert fixed.name == "ece"
    assert fixed.evaluate(s, y) == (ece(bin_samples(s, y, 15)), 15)
    with pytest.raises(ValueError):
        CalibrationEstimatorConfig(EQUAL_MASS, "debiased-rmsce", "adaptive", min_per_bin=1)


def test_reliability_curve_shapes(rng):
    c = reliability_curve(rng.random(50), np.ones(50))
    assert np.all(c.y == 1.0) and c.x.size == 101
    s, y = generate_calibration_stream(10_000, "square", rng)
    c = reliability_curve(s, y)
    # a wide span biases a curved truth, so compare with the smoothed truth
    truth = reliability_curve(s, s**2, grid=c.x)
    assert np.max(np.abs(c.y - truth.y)) < 0.03
    assert np.max(np.abs(c.y - c.x**2)) < 0.06
    narrow = reliability_curve(s, y, span=0.3)
    inner = (narrow.x > 0.1) & (narrow.x < 0.9)
    assert np.max(np.abs(narrow.y - narrow.x**2)[inner]) < 0.03
    s, y = generate_calibration_stream(10_000, "perfect", rng)
    c = reliability_curve(s, y)
    assert np.max(np.abs(c.y - c.x)) < 0.05
    with pytest.raises(UndefinedMetricError):
        reliability_curve([0.5] * 5, [1] * 5)


def test_reliability_constant_scores_fall_back_to_mean():
    c = reliability_curve([0.4] * 20, [1] * 5 + [0] * 15, grid_size=3)
    np.testing.assert_allclose(c.y, 0.25)


def test_orthogonality_transform_moves_calibration_not_auroc(rng):
    from riskaudit.discrimination import auroc

    s, y = generate_calibration_stream(3000, "perfect", rng)
    t = s**3
    assert auroc(s, y) == auroc(t, y)
    assert drmsce(t, y) > drmsce(s, y) + 0.05
    assert math.isfinite(drmsce(t, y))
