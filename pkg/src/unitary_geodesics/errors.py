"""Exception hierarchy.

Validation errors signal bad input (CLI exit code 2); numeric errors signal
that a computation could not be carried out reliably (CLI exit code 3).
"""


class GeodesicError(Exception):
    """Base class for all package errors."""


class ValidationError(GeodesicError, ValueError):
    pass


class RadiusError(ValidationError):
    """A path leaves the ball ``||u(t) - 1|| < sqrt(2)`` where it is required."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NumericError(GeodesicError, ArithmeticError):
    pass


class BranchAmbiguityError(NumericError):
    """An eigenvalue sits on (or too close to) the branch cut at -1."""

    def __init__(self, message, angle=None):
        super().__init__(message)
        self.angle = angle


class InjectivityError(NumericError):
    """The principal logarithm is outside the injectivity radius."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateSpectrumError(NumericError):
    def __init__(self, message, t=None, gap=None):
        super().__init__(message)
        self.t = t
        self.gap = gap


class ConditioningError(NumericError):
    pass


class EmptySpectrumError(NumericError):
    pass


class TransportError(NumericError):
    """Direct rotation precondition ``||p1 - p0|| < 1`` failed."""

    def __init__(self, message, refine_factor=2):
        super().__init__(message)
        self.refine_factor = refine_factor


class PerturbationError(NumericError):
    def __init__(self, message, smallest_gap=None):
        super().__init__(message)
        self.smallest_gap = smallest_gap
