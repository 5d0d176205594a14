"""Exception types shared across the package."""


class HeisPlaneError(Exception):
    """Base class for all package errors."""


class DegeneratePoint(HeisPlaneError, ValueError):
    """Raised when an operation needs a frame at the characteristic point 0."""


class PoleHit(HeisPlaneError, ValueError):
    """Raised when a kernel is evaluated on its diagonal y = z."""


class BudgetExhausted(HeisPlaneError, RuntimeError):
    """Raised when a quadrature error indicator stays above tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
