"""
sumbound_core.errors
--------------------
Exceptions shared by every module.

Each error also derives from the closest built-in exception, so callers that
only know about ``ValueError`` or ``OverflowError`` still catch them.
"""

from __future__ import annotations


class SumboundError(Exception):
    """Base class for all sumbound errors."""


class ConfigError(SumboundError, ValueError):
    """An experiment configuration or CLI grid is invalid."""


class InvalidInputError(SumboundError, ValueError):
    """Input values are NaN/infinite, mixed-format, or not representable."""


class EmptyInputError(InvalidInputError):
    """A summation was requested over zero elements."""


class FormatOverflowError(SumboundError, OverflowError):
    """
    A rounded result overflowed the target format.

    Attributes
    ----------
    step : int | None
        1-based summation step at which the overflow happened (None when the
        overflow came from a single operation outside a summation).
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ZeroSumError(SumboundError, ZeroDivisionError):
    """A relative quantity was requested but the exact sum z_n is 0."""


class DomainError(SumboundError, ValueError):
    """A parameter lies outside its mathematical domain (e.g. failure_prob)."""


class TraceNotRetainedError(SumboundError, LookupError):
    """Per-step data was requested from a trace that only kept its totals."""


class OracleIndexError(SumboundError, IndexError):
    """A closed-form oracle was evaluated at an index outside its range."""
