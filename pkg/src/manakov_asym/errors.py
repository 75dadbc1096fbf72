"""Exception hierarchy shared by every submodule."""


class ManakovError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ManakovError, ValueError):
    pass


class SingularMatrixError(ManakovError, ArithmeticError):
    """Raised when a matrix is too close to singular to invert.

    ``abs_det`` carries the offending ``|det m|``.
    """

    def __init__(self, message, abs_det):
        super().__init__(message)
        self.abs_det = abs_det


class NonGenericDataError(SingularMatrixError):
    """det a(lambda) came too close to zero: the initial datum is not generic."""


class AccuracyError(ManakovError, ArithmeticError):
    """A requested tolerance could not be met. ``best`` holds the best estimate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PoleError(ManakovError, ArithmeticError):
    pass


class RangeError(ManakovError, ValueError):
    pass


class ResolutionError(ManakovError, ValueError):
    pass


class DomainError(ManakovError, ValueError):
    pass


class StabilityError(ManakovError, ValueError):
    pass


class ProfileError(InvalidInputError):
    pass
