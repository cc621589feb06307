"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class McNError(Exception):
    """Base class for all package errors."""


class DomainError(McNError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ParameterError(DomainError):
    """Invalid distribution parameters or violated sub-model constraints."""


class NumericError(McNError, ArithmeticError):
    """An iterative or series computation failed to converge.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (last bracket, partial sum, iteration count, ...).
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class UnsupportedOrderError(NumericError):
    """Requested expansion order exceeds what the implementation supports."""


class IngestionError(McNError, OSError):
    """A data file could not be read into a Dataset."""
