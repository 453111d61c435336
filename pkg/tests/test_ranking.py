import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eur_by_enumeration
from riskaudit.data import enumerate_groups
from riskaudit.errors import UndefinedMetricError
from riskaudit.ranking import (
    SelectionSweep,
    WeightedSweep,
    eur,
    eur_detail,
    representation_curve,
    target_representation,
)


def groups_by_name(dataset):
    return {g.display_name: g for g in enumerate_groups(dataset, dataset.attribute_names)}


def random_population(rng, n_max=60):
    n = int(rng.integers(2, n_max + 1))
    s = rng.integers(0, 6, n) / 5 if rng.random() < 0.5 else rng.random(n)
    y = (rng.random(n) < 0.4).astype(int)
    y[0] = 1
    member = rng.random(n) < 0.5
    member[0] = True
    return s, y, member


def test_four_record_example_exact(four_records):
    g = groups_by_name(four_records)
    assert eur(four_records, g["group=A"]) == 1.0
    assert eur(four_records, g["group=B"]) == 2 / 3
    assert target_representation(four_records, g["group=A"]) == 0.5
    sweep = SelectionSweep(four_records.scores, four_records.outcomes)
    member_a = four_records.attributes["group"] == 0
    assert sweep.representation_ratio(member_a, [0.9]).tolist() == [2.0]
    assert sweep.representation_ratio(~member_a, [0.9]).tolist() == [0.0]
    assert np.isnan(sweep.representation_ratio(member_a, [0.95])[0])


def test_eur_equals_enumeration_exactly(rng):
    for _ in range(400):
        s, y, member = random_population(rng)
        sweep = SelectionSweep(s, y)
        got = sweep.eur(member).value
        assert got == eur_by_enumeration(s.tolist(), y.tolist(), member.tolist())
        lo, hi = sorted(rng.random(2))
        if np.any((s >= lo) & (s <= hi)):
            got = sweep.eur(member, (lo, hi)).value
            assert got == eur_by_enumeration(s.tolist(), y.tolist(), member.tolist(), lo, hi)


def test_overall_group_is_never_under_represented(sex_age):
    overall = enumerate_groups(sex_age, [])[0]
    assert eur(sex_age, overall) == 1.0
    c = representation_curve(sex_age, overall)
    np.testing.assert_allclose(c.y, 1.0)


def test_partition_has_a_group_at_or_above_target(sex_age):
    sweep = SelectionSweep(sex_age.scores, sex_age.outcomes)
    codes = sex_age.attributes["sex"]
    tau = np.linspace(0, 1, 57)
    ratios = np.vstack([sweep.representation_ratio(codes == v, tau) for v in (0, 1)])
    ok = ~np.isnan(ratios[0])
    assert np.all(ratios[:, ok].max(axis=0) >= 1.0 - 1e-12)
    # weighted by target shares the ratios average to exactly one
    w = np.array([sweep.target_representation(codes == v) for v in (0, 1)])
    np.testing.assert_allclose(w @ ratios[:, ok], 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_eur_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    s, y, member = random_population(rng)
    a = SelectionSweep(s, y).eur(member).value
    b = SelectionSweep(np.log1p(s) * 7 - 1, y).eur(member).value
    assert a == b


def test_undefined_cases():
    sweep = SelectionSweep([0.2, 0.4, 0.6], [0, 1, 0])
    with pytest.raises(UndefinedMetricError) as err:
        sweep.eur(np.array([True, False, True]))
    assert err.value.reason == "group-no-positives"
    with pytest.raises(UndefinedMetricError) as err:
        SelectionSweep([0.2, 0.4], [0, 0]).eur(np.array([True, False]))
    assert err.value.reason == "no-positives"
    with pytest.raises(UndefinedMetricError) as err:
        sweep.eur(np.array([False, True, False]), (0.9, 1.0))
    assert err.value.reason == "no-thresholds"


def test_eur_detail_counts_draws(four_records):
    g = groups_by_name(four_records)["group=B"]
    d = eur_detail(four_records, g, (0.5, 1.0))
    assert (d.n_draws, d.n_skipped) == (3, 0)
    assert d.value == pytest.approx((0 + 1 + 2 / 3) / 3, abs=0)


def test_weighted_sweep_matches_materialized_replicate(rng):
    for _ in range(300):
        s, y, member = random_population(rng, n_max=80)
        base = SelectionSweep(s, y)
        counts = np.bincount(rng.integers(0, s.size, s.size), minlength=s.size)
        positions = np.flatnonzero(member[base.order])
        w = WeightedSweep(base, counts)
        idx = np.repeat(base.order, counts)
        ref_sweep = SelectionSweep(s[idx], y[idx])
        tau = np.linspace(0, 1, 11)
        try:
            ref = ref_sweep.eur(member[idx]).value
        except UndefinedMetricError as exc:
            with pytest.raises(UndefinedMetricError) as err:
                w.group(positions, None, tau)
            assert err.value.reason == exc.reason
            continue
        got, ratio = w.group(positions, None, tau)
        assert got == pytest.approx(ref, abs=1e-12)
        np.testing.assert_allclose(ratio, ref_sweep.representation_ratio(member[idx], tau), atol=1e-12)


def test_documented_target_and_eur_examples():
    sweep = SelectionSweep([0.9, 0.6, 0.7, 0.2], [1, 0, 1, 0])
    a = np.array([True, True, False, False])
    assert sweep.target_representation(a) == sweep.target_representation(~a) == 0.5
    holder = np.array([True, False, True, False])
    assert sweep.target_representation(holder) == 1.0
    # members carry the single highest score and every positive; the target
    # share is 1, so thresholds that also select non-members fall short of it
    top = SelectionSweep([0.95, 0.95, 0.3, 0.1], [1, 1, 0, 0])
    assert top.eur(np.array([True, True, False, False])).value == pytest.approx((1 + 1 + 2 / 3 + 1 / 2) / 4, abs=1e-15)
    assert top.representation_ratio(np.array([True, True, False, False]), [0.95]).tolist() == [1.0]


def test_two_group_target_representation():
    from riskaudit.synthetic import generate_two_group_example

    d = generate_two_group_example(20_000, 1)
    codes = d.attributes["group"]
    rates = [d.outcomes[codes == v].mean() for v in (0, 1)]
    assert rates == pytest.approx([2 / 3, 1 / 3], abs=0.01)
    sweep = SelectionSweep(d.scores, d.outcomes)
    # equal sizes, so target shares are proportional to the base rates
    assert sweep.target_representation(codes == 0) == pytest.approx(2 / 3, abs=0.01)
