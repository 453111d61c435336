"""Dataset model, row validation and protected-group enumeration.

Records are stored column-wise (numpy arrays) so that audits over a few
hundred thousand rows stay cheap; :class:`RiskRecord` is the row view.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataValidationError

MISSING = "(missing)"
OVERALL = "overall"


@dataclass(frozen=True)
class RiskRecord:
    score: float
    outcome: int
    attributes: Mapping[str, str]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column store of validated risk records.

    Attributes
    ----------
    scores : ndarray of float64, values in [0, 1]
    outcomes : ndarray of int8, values in {0, 1}
    attributes : dict mapping attribute name to an array of integer codes
        into the attribute's value list in ``schema``.
    schema : tuple of (name, tuple of allowed values)
    """

    scores: np.ndarray
    outcomes: np.ndarray
    attributes: Mapping[str, np.ndarray]
    schema: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        outcomes = np.asarray(self.outcomes, dtype=np.int8)
        if scores.ndim != 1 or scores.shape != outcomes.shape:
            raise ValueError("scores and outcomes must be 1-d arrays of equal length")
        if scores.size == 0:
            raise DataValidationError(["dataset is empty"])
        if not np.all(np.isfinite(scores)) or scores.min() < 0 or scores.max() > 1:
            raise DataValidationError(["scores must be finite and within [0, 1]"])
        if not np.all((outcomes == 0) | (outcomes == 1)):
            raise DataValidationError(["outcomes must be 0 or 1"])
        schema = tuple((str(n), tuple(str(v) for v in vals)) for n, vals in self.schema)
        names = [n for n, _ in schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate attribute names in schema")
        codes = {}
        for name, values in schema:
            if name not in self.attributes:
                raise DataValidationError([f"attribute {name!r} has no column"])
            c = np.asarray(self.attributes[name], dtype=np.int32)
            if c.shape != scores.shape:
                raise ValueError(f"attribute {name!r} has wrong length")
            if c.size and (c.min() < 0 or c.max() >= len(values)):
                raise DataValidationError([f"attribute {name!r} has codes outside its schema"])
            codes[name] = _readonly(c.copy())
        object.__setattr__(self, "scores", _readonly(scores.copy()))
        object.__setattr__(self, "outcomes", _readonly(outcomes.copy()))
        object.__setattr__(self, "attributes", codes)
        object.__setattr__(self, "schema", schema)

    def __len__(self) -> int:
        return int(self.scores.size)

    @property
    def attribute_names(self) -> list[str]:
        return [n for n, _ in self.schema]

    def values_of(self, attribute: str) -> tuple[str, ...]:
        for n, vals in self.schema:
            if n == attribute:
                return vals
        raise KeyError(attribute)

    def record(self, i: int) -> RiskRecord:
        attrs = {n: vals[self.attributes[n][i]] for n, vals in self.schema}
        return RiskRecord(float(self.scores[i]), int(self.outcomes[i]), attrs)

    @property
    def records(self) -> list[RiskRecord]:
        return [self.record(i) for i in range(len(self))]

    @classmethod
    def from_records(cls, records: Sequence[RiskRecord], schema=None) -> "Dataset":
        """Build a dataset from row objects.

        If ``schema`` is omitted the attribute values are collected from the
        records and sorted.
        """
        records = list(records)
        if not records:
            raise DataValidationError(["dataset is empty"])
        if schema is None:
            names = sorted({k for r in records for k in r.attributes})
            schema = [(n, sorted({r.attributes.get(n, MISSING) for r in records})) for n in names]
        schema = [(n, tuple(vals)) for n, vals in schema]
        attrs = {}
        problems = []
        for name, vals in schema:
            lookup = {v: j for j, v in enumerate(vals)}
            col = np.empty(len(records), dtype=np.int32)
            for i, r in enumerate(records):
                v = r.attributes.get(name, MISSING)
                if v not in lookup:
                    problems.append(f"record {i}: value {v!r} of attribute {name!r} not in schema")
                    col[i] = 0
                else:
                    col[i] = lookup[v]
            attrs[name] = col
        if problems:
            raise DataValidationError(problems)
        return cls(
            scores=np.array([r.score for r in records], dtype=np.float64),
            outcomes=np.array([r.outcome for r in records]),
            attributes=attrs,
            schema=tuple(schema),
        )

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            scores=self.scores[rows],
            outcomes=self.outcomes[rows],
            attributes={n: c[rows] for n, c in self.attributes.items()},
            schema=self.schema,
        )


@dataclass(frozen=True)
class GroupDefinition:
    """Conjunction of ``attribute == value`` conditions; empty means everyone."""

    conditions: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        conds = tuple(sorted((str(a), str(v)) for a, v in self.conditions))
        attrs = [a for a, _ in conds]
        if len(set(attrs)) != len(attrs):
            raise ValueError("at most one condition per attribute")
        object.__setattr__(self, "conditions", conds)

    @property
    def is_overall(self) -> bool:
        return not self.conditions

    @property
    def display_name(self) -> str:
        if not self.conditions:
            return OVERALL
        return " & ".join(f"{a}={v}" for a, v in self.conditions)

    def sort_key(self):
        return (
            len(self.conditions),
            tuple(a for a, _ in self.conditions),
            tuple(v for _, v in self.conditions),
        )


@dataclass(frozen=True, eq=False)
class GroupIndex:
    definition: GroupDefinition
    row_indices: np.ndarray = field(repr=False)
    positive_count: int = 0

    @property
    def size(self) -> int:
        return int(self.row_indices.size)

    @property
    def display_name(self) -> str:
        return self.definition.display_name


def _parse_score(text) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _parse_outcome(text) -> int:
    if isinstance(text, bool):
        return int(text)
    v = float(text)
    if v not in (0.0, 1.0):
        raise ValueError(text)
    return int(v)


def validate_dataset(
    raw_rows: Iterable[Mapping[str, object]],
    schema: Sequence[tuple[str, Sequence[str] | None]],
    score_column: str,
    outcome_column: str,
) -> Dataset:
    """Validate parsed table rows and build a :class:`Dataset`.

    ``schema`` lists ``(attribute, allowed_values)`` pairs; ``allowed_values``
    may be ``None`` to accept whatever appears in the data (sorted).  Empty
    cells map to the :data:`MISSING` token, which is always allowed.

    Raises
    ------
    DataValidationError
        With one diagnostic per offending cell; nothing is silently dropped.
    """
    problems: list[str] = []
    scores: list[float] = []
    outcomes: list[int] = []
    raw_attrs: dict[str, list[str]] = {name: [] for name, _ in schema}
    n = 0
    for n, row in enumerate(raw_rows, start=1):
        try:
            s = _parse_score(row[score_column])
            if not 0.0 <= s <= 1.0:
                problems.append(f"row {n}: score {s!r} outside [0, 1]")
        except KeyError:
            problems.append(f"row {n}: missing score column {score_column!r}")
            s = 0.0
        except (TypeError, ValueError):
            problems.append(f"row {n}: score {row[score_column]!r} is not a finite number")
            s = 0.0
        try:
            y = _parse_outcome(row[outcome_column])
        except KeyError:
            problems.append(f"row {n}: missing outcome column {outcome_column!r}")
            y = 0
        except (TypeError, ValueError):
            problems.append(f"row {n}: outcome {row[outcome_column]!r} not in {{0, 1}}")
            y = 0
        scores.append(s)
        outcomes.append(y)
        for name, _ in schema:
            value = row.get(name)
            if value is None and name not in row:
                problems.append(f"row {n}: missing attribute column {name!r}")
            value = "" if value is None else str(value).strip()
            raw_attrs[name].append(value if value else MISSING)
    if n == 0:
        raise DataValidationError(["table has no data rows"])

    attrs = {}
    final_schema = []
    for name, allowed in schema:
        col = raw_attrs[name]
        if allowed is None:
            values = tuple(sorted(set(col)))
        else:
            values = tuple(str(v) for v in allowed)
            if MISSING not in values and MISSING in col:
                values = values + (MISSING,)
        lookup = {v: j for j, v in enumerate(values)}
        codes = np.zeros(len(col), dtype=np.int32)
        for i, v in enumerate(col):
            j = lookup.get(v)
            if j is None:
                problems.append(f"row {i + 1}: value {v!r} of attribute {name!r} not declared in schema")
            else:
                codes[i] = j
        attrs[name] = codes
        final_schema.append((name, values))
    if problems:
        raise DataValidationError(problems)
    return Dataset(
        scores=np.array(scores),
        outcomes=np.array(outcomes),
        attributes=attrs,
        schema=tuple(final_schema),
    )


def enumerate_groups(
    dataset: Dataset,
    sensitive_attributes: Sequence[str],
    max_combination: int = 1,
    min_group_size: int = 1,
) -> list[GroupIndex]:
    """All intersectional groups of up to ``max_combination`` attributes.

    The overall group comes first regardless of ``min_group_size``; the rest
    are ordered by number of conditions, then attribute names, then values.
    Groups may overlap.
    """
    names = sorted(set(sensitive_attributes))
    known = set(dataset.attribute_names)
    unknown = [a for a in names if a not in known]
    if unknown:
        raise KeyError(f"unknown attribute(s): {', '.join(unknown)}")
    if max_combination < 1:
        raise ValueError("max_combination must be >= 1")
    if min_group_size < 1:
        raise ValueError("min_group_size must be >= 1")

    y = dataset.outcomes
    overall = GroupIndex(GroupDefinition(), np.arange(len(dataset)), int(y.sum()))
    found: list[GroupIndex] = []
    for k in range(1, min(max_combination, len(names)) + 1):
        for combo in itertools.combinations(names, k):
            radices = [len(dataset.values_of(a)) for a in combo]
            key = np.zeros(len(dataset), dtype=np.int64)
            for a, r in zip(combo, radices):
                key = key * r + dataset.attributes[a]
            total = math.prod(radices)
            sizes = np.bincount(key, minlength=total)
            keep = np.flatnonzero(sizes >= min_group_size)
            if keep.size == 0:
                continue
            order = np.argsort(key, kind="stable")
            starts = np.concatenate(([0], np.cumsum(sizes)))
            for cell in keep:
                rows = order[starts[cell]:starts[cell + 1]]
                codes = np.unravel_index(cell, radices)
                defn = GroupDefinition(
                    tuple((a, dataset.values_of(a)[c]) for a, c in zip(combo, codes))
                )
                found.append(GroupIndex(defn, _readonly(rows), int(y[rows].sum())))
    found.sort(key=lambda g: g.definition.sort_key())
    return [overall] + found


def group_slice(dataset: Dataset, group: GroupIndex) -> tuple[np.ndarray, np.ndarray]:
    """Scores and outcomes of the group's rows, in dataset order."""
    rows = group.row_indices
    if rows.size == 0:
        raise ValueError(f"group {group.display_name!r} is empty")
    if rows.min() < 0 or rows.max() >= len(dataset):
        raise IndexError(f"group {group.display_name!r} does not index this dataset")
    return dataset.scores[rows], dataset.outcomes[rows]
