"""Exception hierarchy shared by all modules."""


class PoincareError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(PoincareError, ValueError):
    """Malformed region tree or region file."""


class DomainError(PoincareError, ValueError):
    """A point lies outside the set where an operation is defined."""


class IndeterminateError(PoincareError):
    """The symbolic classifier cannot decide a property of a CSG tree."""


class ExhaustedError(PoincareError):
    """An erosion removed every node of the grid."""


class PreconditionError(PoincareError, ValueError):
    """Inputs violate the documented precondition of an operation."""


class SingularMapError(PoincareError):
    """A conformal map has vanishing derivative at the requested point."""


class UnsupportedOracleError(PoincareError):
    """No closed form is known for the requested set."""


class EmptyGridError(PoincareError):
    """Discretization produced no interior nodes."""


class DegenerateBandError(PoincareError):
    """A boundary node sits numerically on the boundary."""


class NoConvergenceError(PoincareError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, last_residual):
        super().__init__(message)
        self.last_residual = last_residual


class SingularSystemError(PoincareError):
    """The Newton linear system could not be solved accurately."""


class OutOfHullError(PoincareError, ValueError):
    """Interpolation was requested outside the stored nodes."""


class InvariantViolation(PoincareError):
    """A numerical invariant that must hold was violated."""


class NoSamplesError(PoincareError):
    """No admissible sample nodes remain at the requested resolution."""
