"""Exception types shared across the laboratory modules."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes."""


class NonFiniteInputError(ValueError):
    """An input vector or matrix contains NaN or infinity."""


class MonotonicityError(ValueError):
    """A sequence that must be entrywise nondecreasing decreased somewhere.

    Carries the offending entry index and the magnitude of the decrease.
    """

    def __init__(self, message, entry=None, magnitude=None):
        super().__init__(message)
        self.entry = entry
        self.magnitude = magnitude


class EllipticityError(ValueError):
    """Coefficient field violates the ellipticity bound at a grid point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SchemeError(RuntimeError):
    """A finite-difference assembly produced a matrix outside the M-matrix class."""


class SolverError(RuntimeError):
    """A direct linear solve failed or left a residual above tolerance."""
