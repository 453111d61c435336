import numpy as np
import pytest

from riskaudit.discrimination import auroc, roc_curve
from riskaudit.resampling import (
    OK,
    UNRELIABLE,
    BootstrapPlan,
    CurveSpec,
    Panel,
    bootstrap_curve,
    bootstrap_group,
    bootstrap_metric,
    percentile_interval,
    replicate_rng,
    resample_indices,
)


def mean(s, y):
    return float(np.mean(y))


def test_percentile_interval_order_statistics():
    v = np.arange(1, 201, dtype=float)[::-1]
    # ranks ceil(0.025 * 200) = 5 and ceil(0.975 * 200) = 195
    assert percentile_interval(v, 0.95) == (5.0, 195.0)
    assert percentile_interval([3.0], 0.95) == (3.0, 3.0)
    assert percentile_interval(np.arange(1, 11), 0.8) == (1.0, 9.0)
    with pytest.raises(ValueError):
        percentile_interval([], 0.95)


def test_replicate_streams_are_independent_of_order():
    a = replicate_rng(7, "g0001", 3).random(5)
    replicate_rng(7, "g0001", 2).random(5)
    assert np.array_equal(a, replicate_rng(7, "g0001", 3).random(5))
    assert not np.array_equal(a, replicate_rng(7, "g0002", 3).random(5))
    assert not np.array_equal(a, replicate_rng(8, "g0001", 3).random(5))


def test_resample_indices_sorted_draw_with_replacement():
    idx = resample_indices(50, replicate_rng(0, "x", 0))
    assert idx.size == 50 and np.all(np.diff(idx) >= 0)
    assert idx.min() >= 0 and idx.max() < 50


def test_identical_across_workers(rng):
    s = rng.random(300)
    y = (rng.random(300) < s).astype(int)
    plan = BootstrapPlan(60, 0.95, 11)
    grid = np.linspace(0, 1, 21)
    runs = [
        bootstrap_group(s, y, {"auroc": auroc, "mean": mean}, plan, "g",
                        curves={"roc": CurveSpec(roc_curve, grid)}, workers=w)
        for w in (1, 4)
    ]
    assert runs[0].metrics == runs[1].metrics
    assert runs[0].curves["roc"].equals(runs[1].curves["roc"])


def test_dropped_replicates_counted_and_flagged():
    s = [0.1, 0.2, 0.3, 0.4, 0.9]
    y = [0, 0, 0, 0, 1]
    est = bootstrap_metric(s, y, auroc, BootstrapPlan(200, 0.95, 0), "tiny")
    assert est.point_estimate == 1.0
    assert est.n_replicates_used + est.n_replicates_dropped == 200
    # a replicate lacks the positive with probability (4/5)^5 ~ 0.33
    assert 40 < est.n_replicates_dropped < 95
    assert est.reliability_flag == OK
    strict = bootstrap_metric(s, y, auroc, BootstrapPlan(200, 0.95, 0, drop_threshold=0.2), "tiny")
    assert strict.reliability_flag == UNRELIABLE
    assert strict.n_replicates_dropped == est.n_replicates_dropped


def test_undefined_point_estimate_keeps_reason():
    est = bootstrap_metric([0.2, 0.3], [0, 0], auroc, BootstrapPlan(20), "none")
    assert est.point_estimate is None and est.missing_reason == "single-class"
    assert est.n_replicates_dropped == 20 and est.reliability_flag == UNRELIABLE


def test_bootstrap_disabled_gives_point_only():
    est = bootstrap_metric([0.2, 0.7], [0, 1], auroc, BootstrapPlan(0), "off")
    assert est.point_estimate == 1.0 and est.ci_lower is None
    assert est.missing_reason == "bootstrap-disabled"


def test_interval_brackets_median(rng):
    y = (rng.random(200) < 0.5).astype(int)
    est = bootstrap_metric(np.zeros(200), y, mean, BootstrapPlan(200, 0.9, 3), "m")
    assert est.ci_lower <= est.median <= est.ci_upper
    assert est.point_estimate == y.mean()


def test_curve_bands_enclose_center(rng):
    s = rng.random(150)
    y = (rng.random(150) < s).astype(int)
    c = bootstrap_curve(s, y, roc_curve, np.linspace(0, 1, 11), BootstrapPlan(50, 0.95, 1), "c")
    ok = ~np.isnan(c.lower)
    assert np.all(c.lower[ok] <= c.y[ok]) and np.all(c.y[ok] <= c.upper[ok])
    assert bootstrap_curve([0.1, 0.2], [1, 1], roc_curve, [0, 1], BootstrapPlan(5), "c") is None


def test_duplicate_names_rejected():
    panel = Panel(lambda s, y: ({"auroc": auroc(s, y)}, {}), ("auroc",))
    with pytest.raises(ValueError):
        bootstrap_group([0.1, 0.9], [0, 1], {"auroc": auroc}, BootstrapPlan(2), "d", panels=[panel])


def test_plan_validation():
    for kw in ({"n_replicates": -1}, {"ci_level": 1.0}, {"drop_threshold": 2.0}):
        with pytest.raises(ValueError):
            BootstrapPlan(**kw)


def test_degenerate_distribution_gives_point_interval():
    est = bootstrap_metric([0.1, 0.2, 0.3, 0.4], [1, 1, 1, 1], mean, BootstrapPlan(50), "ones")
    assert (est.median, est.ci_lower, est.ci_upper) == (1.0, 1.0, 1.0)


def test_constant_curve_has_zero_width_bands():
    from riskaudit.curves import CurveSeries

    grid = np.linspace(0, 1, 5)
    c = bootstrap_curve(np.linspace(0, 1, 30), np.zeros(30), lambda s, y: CurveSeries(grid, np.full(5, 0.3)),
                        grid, BootstrapPlan(40), "flat")
    assert np.array_equal(c.lower, c.y) and np.array_equal(c.upper, c.y)


def test_reliability_bands_cover_diagonal_when_calibrated():
    from riskaudit.calibration import reliability_curve
    from riskaudit.synthetic import generate_calibration_stream

    s, y = generate_calibration_stream(10_000, "perfect", 12)
    grid = np.linspace(s.min(), s.max(), 101)
    c = bootstrap_curve(s, y, lambda a, b: reliability_curve(a, b, grid=grid), grid, BootstrapPlan(100, 0.95, 12), "rel")
    inside = (c.lower <= grid) & (grid <= c.upper)
    assert inside.mean() >= 0.9
