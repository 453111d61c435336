import numpy as np
import pytest

from riskaudit.data import Dataset, RiskRecord


@pytest.fixture
def four_records() -> Dataset:
    """Two groups, two positives; the hand-worked EUR example."""
    recs = [
        RiskRecord(0.9, 1, {"group": "A"}),
        RiskRecord(0.6, 0, {"group": "A"}),
        RiskRecord(0.7, 1, {"group": "B"}),
        RiskRecord(0.2, 0, {"group": "B"}),
    ]
    return Dataset.from_records(recs)


@pytest.fixture
def sex_age() -> Dataset:
    """Two crossed binary attributes, every cell populated."""
    rng = np.random.default_rng(7)
    n = 400
    return Dataset(
        scores=rng.random(n),
        outcomes=(rng.random(n) < 0.4).astype(np.int8),
        attributes={"sex": np.arange(n) % 2, "age": (np.arange(n) // 2) % 2},
        schema=(("sex", ("F", "M")), ("age", ("O", "Y"))),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
