"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class DiscLabError(Exception):
    """Base class for all library errors."""


class DomainError(DiscLabError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(DiscLabError, ValueError):
    """A parameter combination violates the hypotheses of a check."""


class ResolutionError(DiscLabError):
    """The requested grid or truncation cannot reach the tolerance."""


class UnconvergedError(DiscLabError):
    """A numerical procedure exhausted its budget.

    The best available estimate is kept on ``estimate``.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate
