"""Exception types shared across the package."""

from __future__ import annotations


class BesselHouseError(Exception):
    """Base class for all package-specific failures."""


class DomainError(BesselHouseError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class SeriesNotConverged(BesselHouseError, ArithmeticError):
    """A series evaluation could not certify the requested tolerance.

    Raised when the admissible term budget is exhausted, when the decay
    scale falls below the policy floor, or when floating-point cancellation
    makes the result numerically indeterminate at the requested accuracy.
    """

    def __init__(self, message: str, *, scale: float | None = None, terms: int | None = None):
        super().__init__(message)
        self.scale = scale
        self.terms = terms


class PositivityViolation(BesselHouseError, ArithmeticError):
    """A quantity that must be strictly positive evaluated non-positive."""


class QuadratureError(BesselHouseError, ArithmeticError):
    """A definite integral did not converge to the requested tolerance."""


class MassDeviation(BesselHouseError, ArithmeticError):
    """An integrated probability mass deviates from 1 beyond tolerance.

    Raised instead of renormalizing silently: a mass defect points at a
    series or domain bug upstream, and hiding it would defeat the point
    of carrying certified truncation errors around.
    """

    def __init__(self, message: str, *, mass: float | None = None):
        super().__init__(message)
        self.mass = mass


class RejectionExhausted(BesselHouseError, RuntimeError):
    """Rejection sampling hit its attempt budget without an acceptance."""

    def __init__(self, message: str, *, attempts: int | None = None):
        super().__init__(message)
        self.attempts = attempts
