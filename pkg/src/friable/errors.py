"""Exception types shared across the package."""


class FriableError(Exception):
    """Base class for all errors raised by :mod:`friable`."""


class CapacityError(FriableError, ValueError):
    """Requested size exceeds a documented implementation cap."""


class OutOfRangeError(FriableError, ValueError):
    """Query falls outside the range covered by a precomputed table."""


class DomainError(FriableError, ValueError):
    """Arguments outside the mathematical domain of a function."""


class PoleError(DomainError):
    """Evaluation at a pole. ``residue`` holds the residue there."""

    def __init__(self, message, residue):
        super().__init__(message)
        self.residue = residue


class AliasingError(DomainError):
    """Sampling modulus too small to separate the summation range."""


class NumericError(FriableError, ArithmeticError):
    """A numerical procedure failed to converge.

    ``diagnostics`` is a dict with whatever the procedure could report.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InputError(FriableError, ValueError):
    """Caller-supplied data is incomplete or malformed."""
