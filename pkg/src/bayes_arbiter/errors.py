"""Exception types shared across the package."""

from __future__ import annotations


class DegeneracyError(ValueError):
    """Raised when a dataset or state makes the target distribution improper.

    The canonical case is an all-zero count dataset under the 1/lambda
    prior, whose marginal likelihood integral diverges.
    """


class ImproperEvidenceError(DegeneracyError):
    """Raised when a marginal likelihood does not exist (non-integrable)."""


class AccuracyError(RuntimeError):
    """Raised when a numerical routine cannot meet its accuracy target.

    Carries the best available estimate so callers can inspect it.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate
