"""Exception types shared across the package."""


class DfsLabError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(DfsLabError, ValueError):
    """Operands have incompatible or non-square shapes."""


class DomainError(DfsLabError, ValueError):
    """A value violates a mathematical precondition (not Hermitian, not SPD, ...)."""


class BudgetError(DfsLabError, RuntimeError):
    """A construction would exceed the configured dimension budget."""


class UsageError(DfsLabError, ValueError):
    """An operation was called in a way its contract does not allow."""


class NonClosureError(DfsLabError, RuntimeError):
    """Group closure did not terminate within the configured order bound."""


class UnsupportedFluxError(DfsLabError, ValueError):
    """A flux matrix is outside the representable block-rational family."""
