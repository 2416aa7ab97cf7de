"""Exception hierarchy shared by every module."""


class LoglossError(Exception):
    """Base class for all package errors."""


class ValidationError(LoglossError, ValueError):
    """Input violates a documented precondition."""


class NegativeMass(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class EmptyAlphabet(ValidationError):
    pass


class ZeroProbabilityCondition(ValidationError):
    pass


class SupportMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ZeroMassAtRealization(ValidationError):
    pass


class BudgetOutOfRange(ValidationError):
    pass


class InconsistentSplit(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class EnumerationTooLarge(LoglossError):
    pass


class GridTooLarge(LoglossError):
    pass


class NonConvergenceWarning(UserWarning):
    """Alternating minimization hit its iteration cap on every restart."""
