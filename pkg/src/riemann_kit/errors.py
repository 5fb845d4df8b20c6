"""Exception hierarchy shared by every module."""


class RiemannKitError(Exception):
    """Base class for all library errors."""


class InputError(RiemannKitError, ValueError):
    """Malformed or dimensionally inconsistent input."""


class DomainError(RiemannKitError):
    """A point lies outside the domain where an evaluator is defined."""


class EvaluationError(RiemannKitError):
    """An evaluator returned non-finite values."""


class StateError(RiemannKitError):
    """A state fails the system's admissibility predicate."""


class SamplingError(RiemannKitError):
    """The sampler could not produce any usable point."""


class RankError(RiemannKitError):
    """Wave vectors are linearly dependent."""


class DegeneracyError(RiemannKitError):
    """A construction degenerates (zero determinant, zero wave vector, ...)."""


class ConstraintError(RiemannKitError):
    """Parameters violate a stated constraint of a construction."""


class ImplicitSolveError(RiemannKitError):
    """An implicit relation could not be solved.

    The last iterate is kept in ``last_iterate`` when available.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SingularityError(RiemannKitError):
    """A matrix that must be inverted is numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class LiftError(RiemannKitError):
    """Fixed-point lifting of a reduced solution diverged."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ExpressionError(RiemannKitError, ValueError):
    """An expression string could not be parsed or evaluated.

    ``position`` is the 1-based column of the offending token when known.
    """

    def __init__(self, message, position=None):
        self.detail = message
        if position is not None:
            message = f"{message} (at column {position})"
        super().__init__(message)
        self.position = position
