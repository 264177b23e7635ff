"""Exception types shared across the package.

Everything derives from ShapeSpacesError so callers can catch the package's
failures with a single except clause; the CLI maps subclasses onto exit codes.
"""


class ShapeSpacesError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(ShapeSpacesError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatchError(ShapeSpacesError, ValueError):
    """Array shapes are inconsistent with each other or with the contract."""


class DegenerateConfigurationError(ShapeSpacesError, ValueError):
    """All landmarks coincide, so no pre-shape exists (the diagonal orbit)."""


class AntipodalPointError(ShapeSpacesError, ValueError):
    """The spherical logarithm or transport was requested at the cut locus."""


class EmptySampleError(ShapeSpacesError, ValueError):
    """A sample container holds no observations."""


class SingularCovarianceError(ShapeSpacesError, ArithmeticError):
    """A pooled covariance matrix is numerically singular (cond > 1e12)."""


class UnreachableDistanceError(ShapeSpacesError, ValueError):
    """No point at the requested quotient distance exists along the search."""


class TooFewPointsError(ShapeSpacesError, ValueError):
    """A polyline has too few vertices for the requested operation."""


class DegenerateChordError(ShapeSpacesError, ValueError):
    """Landmark placement found no usable chord (e.g. a straight segment)."""


class MalformedRowError(ShapeSpacesError, ValueError):
    """A data file row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
