"""Exception types shared across the package."""

from __future__ import annotations


class RiskAuditError(Exception):
    """Base class for all package errors."""


class DataValidationError(RiskAuditError, ValueError):
    """Raised when ingested rows violate the dataset contract.

    ``diagnostics`` holds one human readable line per offending row/cell.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        shown = "\n".join(self.diagnostics[:20])
        more = len(self.diagnostics) - 20
        if more > 0:
            shown += f"\n... and {more} more"
        super().__init__(f"{len(self.diagnostics)} validation error(s):\n{shown}")


class ConfigError(RiskAuditError, ValueError):
    """Invalid audit or study configuration."""


class UndefinedMetricError(RiskAuditError, ValueError):
    """A metric has no value on the given input (e.g. a single-class group).

    ``reason`` is a short machine readable code that ends up in reports.
    """

    def __init__(self, reason: str, message: str | None = None):
        self.reason = reason
        super().__init__(message or reason)
