"""Exception types shared across the package.

The CLI maps these onto exit codes: format and data problems are exit 2,
infeasibility and solver guards are exit 3, usage mistakes are exit 1.
"""

from __future__ import annotations


class SpanProjectError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(SpanProjectError):
    """A file or string does not conform to its expected format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(SpanProjectError):
    """Well-formed input that violates a semantic constraint (bounds, overlap, ...)."""


class GuardError(SpanProjectError):
    """A solver size guard was exceeded."""


class InfeasibleError(SpanProjectError):
    """No solution satisfies the constraints of the requested mode."""

    def __init__(self, message: str, uncoverable: tuple[int, ...] = ()):
        self.uncoverable = uncoverable
        if uncoverable:
            message = f"{message} (uncoverable sources: {list(uncoverable)})"
        super().__init__(message)


class UsageError(SpanProjectError):
    """Bad command-line invocation or configuration."""
