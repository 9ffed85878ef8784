"""Exception types raised across the package."""


class LacunaryError(Exception):
    """Base class for all package errors."""


class DomainError(LacunaryError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintError(DomainError):
    """A structural constraint on the input is violated (e.g. a gap ratio below 2)."""


class SizeError(LacunaryError, IndexError):
    """Requested more terms than the data provides."""


class IntegralityError(LacunaryError, TypeError):
    """An operation needs integer frequencies but got real ones."""


class PreconditionError(LacunaryError):
    """A caller-side certification is missing (e.g. ratio >= 2 for the product formula)."""


class ConvergenceError(LacunaryError, RuntimeError):
    """An iterative numerical routine did not converge.

    The last two iterates are kept on the exception for inspection.
    """

    def __init__(self, message, previous=None, last=None):
        super().__init__(message)
        self.previous = previous
        self.last = last


class BudgetError(LacunaryError, RuntimeError):
    """An exhaustive enumeration would exceed its configuration budget."""

    def __init__(self, message, configurations=None):
        super().__init__(message)
        self.configurations = configurations


class PrecisionError(LacunaryError, ArithmeticError):
    """A truncation remainder is too large for the requested comparison."""


class RangeError(LacunaryError, OverflowError):
    """A quantity underflows or overflows the representable range."""
