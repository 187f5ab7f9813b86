"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A model parameter or probability lies outside its domain."""


class DegenerateSeriesError(ValueError):
    """An estimator denominator vanished (all-zero window)."""


class UnsupportedBiasError(ValueError):
    """No first-order conditional bias is available for this estimator."""


class NumericError(ArithmeticError):
    """A solver failed to converge or a guard against division by ~0 tripped."""
