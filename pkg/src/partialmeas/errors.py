"""Exception types raised across the package."""


class PartialMeasError(Exception):
    """Base class for all package errors."""


class SingularOperator(PartialMeasError):
    """Raised when inverting an operator whose determinant vanishes."""


class InvalidProbability(PartialMeasError, ValueError):
    """Raised when a tunneling probability lies outside [0, 1]."""


class ZeroProbabilityOutcome(PartialMeasError):
    """Raised when conditioning on an outcome that cannot occur."""


class NonInvertibleMeasurement(PartialMeasError):
    """Raised when reversal is requested for p or q at 0 or 1."""


class DegenerateDistribution(PartialMeasError):
    """Raised when the outcome distribution is deterministic but the score is not zero."""


class NonIdentifiable(PartialMeasError):
    """Raised when the data carry no information about the state (p == q)."""
