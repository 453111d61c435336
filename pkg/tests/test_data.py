import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskaudit.data import (
    MISSING,
    Dataset,
    GroupDefinition,
    GroupIndex,
    enumerate_groups,
    group_slice,
    validate_dataset,
)
from riskaudit.errors import DataValidationError

SCHEMA = [("sex", ["M", "F"])]


def rows(*triples):
    return [{"score": s, "outcome": y, "sex": g} for s, y, g in triples]


def test_validate_four_valid_rows():
    ds = validate_dataset(rows(("0.1", "0", "M"), ("0.5", "1", "F"), ("0.9", "1", "F"), ("0", "0", "M")),
                          SCHEMA, "score", "outcome")
    assert len(ds) == 4
    assert ds.values_of("sex") == ("M", "F")
    assert ds.record(1).attributes == {"sex": "F"}
    np.testing.assert_array_equal(ds.outcomes, [0, 1, 1, 0])


def test_score_out_of_bounds_names_row_and_bound():
    with pytest.raises(DataValidationError) as err:
        validate_dataset(rows(("0.2", "0", "M"), ("1.3", "1", "F")), SCHEMA, "score", "outcome")
    [msg] = err.value.diagnostics
    assert "row 2" in msg and "[0, 1]" in msg


def test_bad_outcome_and_unknown_value_each_reported():
    with pytest.raises(DataValidationError) as err:
        validate_dataset(rows(("0.2", "2", "M"), ("0.3", "1", "X"), ("abc", "0", "F")), SCHEMA, "score", "outcome")
    diag = err.value.diagnostics
    assert len(diag) == 3
    assert any("row 1" in d and "outcome" in d for d in diag)
    assert any("row 2" in d and "'X'" in d for d in diag)
    assert any("row 3" in d and "score" in d for d in diag)


def test_empty_table_rejected():
    with pytest.raises(DataValidationError):
        validate_dataset([], SCHEMA, "score", "outcome")


def test_missing_cell_becomes_its_own_category():
    ds = validate_dataset(rows(("0.2", "0", ""), ("0.3", "1", "F")), SCHEMA, "score", "outcome")
    assert ds.values_of("sex") == ("M", "F", MISSING)
    assert ds.record(0).attributes["sex"] == MISSING


def test_dataset_is_read_only(four_records):
    with pytest.raises(ValueError):
        four_records.scores[0] = 0.5


def test_nine_groups_for_two_binary_attributes(sex_age):
    groups = enumerate_groups(sex_age, ["sex", "age"], max_combination=2)
    names = [g.display_name for g in groups]
    assert names == [
        "overall",
        "age=O", "age=Y", "sex=F", "sex=M",
        "age=O & sex=F", "age=O & sex=M", "age=Y & sex=F", "age=Y & sex=M",
    ]
    for g in groups:
        expect = np.ones(len(sex_age), dtype=bool)
        for a, v in g.definition.conditions:
            expect &= sex_age.attributes[a] == sex_age.values_of(a).index(v)
        np.testing.assert_array_equal(g.row_indices, np.flatnonzero(expect))
        assert g.positive_count == int(sex_age.outcomes[expect].sum())


def test_min_group_size_filters_but_keeps_overall(sex_age):
    groups = enumerate_groups(sex_age, ["sex", "age"], 2, min_group_size=10_000)
    assert [g.display_name for g in groups] == ["overall"]


def test_unknown_attribute_raises(sex_age):
    with pytest.raises(KeyError):
        enumerate_groups(sex_age, ["sex", "height"])


def test_partition_sizes_sum_to_dataset(sex_age):
    groups = enumerate_groups(sex_age, ["sex"], 1)
    assert sum(g.size for g in groups[1:]) == len(sex_age)


def test_group_slice_subsequence_and_errors(sex_age):
    overall, first = enumerate_groups(sex_age, ["sex"])[:2]
    s_all, _ = group_slice(sex_age, overall)
    s_one, y_one = group_slice(sex_age, first)
    np.testing.assert_array_equal(s_all, sex_age.scores)
    np.testing.assert_array_equal(s_one, sex_age.scores[first.row_indices])
    assert np.all(np.diff(first.row_indices) > 0)
    empty = GroupIndex(GroupDefinition((("sex", "F"),)), np.array([], dtype=np.int64), 0)
    with pytest.raises(ValueError):
        group_slice(sex_age, empty)
    stale = GroupIndex(GroupDefinition(), np.array([0, 10_000]), 0)
    with pytest.raises(IndexError):
        group_slice(sex_age, stale)


def test_group_definition_rejects_repeated_attribute():
    with pytest.raises(ValueError):
        GroupDefinition((("sex", "F"), ("sex", "M")))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_enumeration_invariant_under_row_permutation(seed):
    rng = np.random.default_rng(seed)
    n = 60
    ds = Dataset(
        scores=rng.random(n),
        outcomes=rng.integers(0, 2, n),
        attributes={"a": rng.integers(0, 3, n), "b": rng.integers(0, 2, n)},
        schema=(("a", ("x", "y", "z")), ("b", ("p", "q"))),
    )
    perm = rng.permutation(n)
    g1 = enumerate_groups(ds, ["a", "b"], 2, 3)
    g2 = enumerate_groups(ds.subset(perm), ["a", "b"], 2, 3)
    assert [(g.display_name, g.size, g.positive_count) for g in g1] == [
        (g.display_name, g.size, g.positive_count) for g in g2
    ]
