"""Fairness auditing for risk score models.

Per-group calibration error (including a debiased, adaptive bin-count
estimator), discrimination (AUROC, AUPRG) and ranking representation (EUR),
each with test-set bootstrap confidence intervals.
"""

__version__ = "0.1.0"

from .calibration import (
    BinnedCalibration,
    CalibrationEstimatorConfig,
    bin_samples,
    debiased_rmsce,
    drmsce,
    ece,
    max_monotonic_bins,
    reliability_curve,
    rmsce,
)
from .curves import CurveSeries
from .data import Dataset, GroupDefinition, GroupIndex, RiskRecord, enumerate_groups, group_slice, validate_dataset
from .discrimination import auprg, auroc, prg_curve, roc_curve
from .errors import ConfigError, DataValidationError, UndefinedMetricError
from .ranking import SelectionSweep, eur, representation_curve, target_representation
from .resampling import BootstrapPlan, MetricEstimate, bootstrap_curve, bootstrap_metric

__all__ = [
    "BinnedCalibration", "BootstrapPlan", "CalibrationEstimatorConfig", "ConfigError", "CurveSeries",
    "DataValidationError", "Dataset", "GroupDefinition", "GroupIndex", "MetricEstimate", "RiskRecord",
    "SelectionSweep", "UndefinedMetricError", "auprg", "auroc", "bin_samples", "bootstrap_curve",
    "bootstrap_metric", "debiased_rmsce", "drmsce", "ece", "enumerate_groups", "eur", "group_slice",
    "max_monotonic_bins", "prg_curve", "reliability_curve", "representation_curve", "rmsce", "roc_curve",
    "target_representation", "validate_dataset",
]
