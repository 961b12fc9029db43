"""Exception types shared across the package."""


class HeatmpoError(Exception):
    """Base class for all package-specific errors."""


class AccuracyError(HeatmpoError):
    """A quadrature or iterative routine failed to reach the requested
    tolerance.  Carries the best estimate achieved so far."""

    def __init__(self, message, estimate=None, achieved_tol=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_tol = achieved_tol


class UnsupportedConfigError(HeatmpoError):
    """The requested configuration is outside the model's validity range
    (e.g. a biased spin for routines defined only at omega0 = 0)."""


class NumericalBlowupError(HeatmpoError):
    """Propagation produced non-finite values.  Carries the step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NotConvergedError(HeatmpoError):
    """A self-consistent solve did not converge within its iteration cap."""
