"""Exception hierarchy shared by every module of the package."""


class PolySzegoError(Exception):
    """Base class for all package errors."""


class ValidationError(PolySzegoError, ValueError):
    """Invalid input: bad parameters, malformed configs, out-of-domain points."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UnsupportedMultiplicityError(ValidationError):
    """A root of the trigonometric weight was given multiplicity other than 1."""


class ProximityError(ValidationError):
    """Evaluation point too close to a root of the weight (kernel blow-up)."""


class ConvergenceError(PolySzegoError):
    """A numerical procedure ran out of budget before reaching its tolerance.

    The best available estimate and its error bound are carried along so callers
    can still report a partial result.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DivergenceError(PolySzegoError):
    """An integral was certified to diverge to minus infinity."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonSzegoError(DivergenceError):
    """The measure fails the Szegő condition; use the modified Szegő function."""


class PrecisionError(PolySzegoError):
    """Working precision exhausted (e.g. a nonpositive Toeplitz minor)."""


class SeriesTruncationError(ConvergenceError):
    """A truncated series has a tail estimate above the requested tolerance."""


class ConsistencyError(PolySzegoError):
    """An internal cross-check failed (should not happen for valid inputs)."""
