"""Exception types shared across the package."""


class PsdRankError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(PsdRankError, ValueError):
    """Shapes are empty, non-square, or incompatible."""


class DomainError(PsdRankError, ValueError):
    """Input lies outside the domain of an operation (negative entries, bad sums, ...)."""


class PreconditionError(PsdRankError, ValueError):
    """A documented precondition of a construction does not hold."""
