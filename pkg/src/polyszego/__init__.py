"""Orthogonal polynomials on the unit circle in the polynomial Szegő class."""

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DivergenceError,
    NonSzegoError,
    PolySzegoError,
    PrecisionError,
    ProximityError,
    SeriesTruncationError,
    UnsupportedMultiplicityError,
    ValidationError,
)
from .quadrature import QuadratureSpec, integrate_circle

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "ConvergenceError",
    "DivergenceError",
    "NonSzegoError",
    "PolySzegoError",
    "PrecisionError",
    "ProximityError",
    "QuadratureSpec",
    "SeriesTruncationError",
    "UnsupportedMultiplicityError",
    "ValidationError",
    "integrate_circle",
]
