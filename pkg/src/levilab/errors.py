"""Shared exception types."""


class LeviLabError(Exception):
    """Base class for all package-specific errors."""


class ParseError(LeviLabError, ValueError):
    """Syntax or validation error in a polynomial expression.

    Carries the byte offset of the failure and, when known, the set of
    token kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset
        self.expected = frozenset(expected)


class DimensionError(LeviLabError, ValueError):
    """Operands live in different ambient dimensions."""


class DegeneracyError(LeviLabError, RuntimeError):
    """Numerical degeneracy: singular Jacobian, vanishing gradient,
    non-convergent projection, or a majority of skipped samples."""


class InvariantViolation(LeviLabError, RuntimeError):
    """An internal cross-check failed; indicates a bug, not bad input."""
