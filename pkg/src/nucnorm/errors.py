"""Exception hierarchy."""


class RecoveryError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(RecoveryError, ValueError):
    pass


class DomainError(RecoveryError, ValueError):
    """A scalar argument lies outside the domain of a formula."""


class NumericalError(RecoveryError, ArithmeticError):
    """An iterative numerical kernel failed to converge."""


class DegenerateMapError(RecoveryError):
    """The measurement matrix does not have full row rank."""


class DegenerateDecompositionError(RecoveryError):
    """The r x r corner block of the Schur split is (near) singular."""


class InvalidReferenceError(RecoveryError, ValueError):
    pass


class NotInNullSpaceError(RecoveryError, ValueError):
    pass


class NoCounterexampleError(RecoveryError):
    """The supplied null-space element does not violate the condition."""
