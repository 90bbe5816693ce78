"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`RoughDiffError`, so callers (the CLI in particular) can map whole
families of failures onto exit codes.
"""


class RoughDiffError(Exception):
    """Base class for all library errors."""


class DomainError(RoughDiffError, ValueError):
    """Point or function lies outside the expected interval or domain."""


class RepresentationError(RoughDiffError, ValueError):
    """Result cannot be represented (degree cap, non-polynomial result)."""


class DegeneracyError(RoughDiffError, ValueError):
    """Coefficient is degenerate for the requested operation."""


class MembershipError(DegeneracyError):
    """Coefficient is not bounded below by a positive constant."""


class UsageError(RoughDiffError, ValueError):
    """Invalid arguments, e.g. an empty probe list or sweep."""


class PreconditionError(RoughDiffError, ValueError):
    """A mathematical precondition of an operation is violated."""


class NumericalError(RoughDiffError, ArithmeticError):
    """Base class for failures of a numerical algorithm."""


class SingularityError(NumericalError):
    """Matrix is numerically singular.

    Attributes
    ----------
    min_singular_value : float
        Smallest singular value that was observed.
    """

    def __init__(self, message, min_singular_value):
        super().__init__(message)
        self.min_singular_value = min_singular_value


class IterationLimitError(NumericalError):
    """An iterative method did not converge within its iteration budget."""


class InvariantViolation(RoughDiffError):
    """A mathematical invariant or audited bound failed to hold."""
