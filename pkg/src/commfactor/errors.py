"""Exception types raised across the package."""


class CommutatorError(Exception):
    """Base class for all errors raised by commfactor."""


class DimensionError(CommutatorError, ValueError):
    pass


class NotTraceZeroError(CommutatorError, ValueError):
    pass


class NonUnitaryError(CommutatorError, ValueError):
    pass


class SpectraOverlapError(CommutatorError, ValueError):
    """Raised when a Sylvester equation has coincident spectral values."""

    def __init__(self, msg, i=None, j=None):
        super().__init__(msg)
        self.i = i
        self.j = j


class ContourError(CommutatorError, ValueError):
    pass


class QuadratureError(CommutatorError, RuntimeError):
    pass


class IsotropicVectorError(CommutatorError, RuntimeError):
    pass


class LatticeError(CommutatorError, ValueError):
    pass


class PavingError(CommutatorError, ValueError):
    pass


class SeparationError(CommutatorError, RuntimeError):
    pass
