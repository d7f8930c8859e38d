"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to, so the command-line layer can
translate failures without a lookup table.
"""
from __future__ import annotations


class InfovolError(Exception):
    exit_code = 1


class ArgumentError(InfovolError, ValueError):
    """Bad argument value or violated precondition."""

    exit_code = 3


class ConfigError(ArgumentError):
    exit_code = 3


class AlignmentError(ArgumentError):
    exit_code = 3


class IngestionError(InfovolError):
    """Raised when an input file cannot be parsed.

    Parameters
    ----------
    message : str
    row : int, optional
        1-based row number in the source file.
    """

    exit_code = 4

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyInputError(IngestionError):
    pass


class DomainError(InfovolError, ValueError):
    """Value outside the mathematical domain of an operation."""

    exit_code = 4


class DegenerateInputError(DomainError):
    """Zero-variance or otherwise degenerate data."""


class NumericalError(InfovolError, ArithmeticError):
    exit_code = 5

    def __init__(self, message: str, t: int | None = None):
        self.t = t
        if t is not None:
            message = f"{message} (at t={t})"
        super().__init__(message)


class ReliabilityError(NumericalError):
    """Too many failed fits for a resampling result to be trusted."""
