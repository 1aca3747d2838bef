"""Exception types shared across the package."""

from __future__ import annotations


class KerrBathError(Exception):
    """Base class for all package errors."""


class DomainError(KerrBathError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(KerrBathError, RuntimeError):
    """A numerical scheme did not meet its tolerance.

    Attributes
    ----------
    estimate : float
        Best available value (or ``nan`` when no scalar applies).
    error : float
        Estimated error of ``estimate``.
    tol : float
        Tolerance that was requested.
    """

    def __init__(self, message: str, *, estimate: float = float("nan"),
                 error: float = float("nan"), tol: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.tol = tol


class AccuracyNotReached(ConvergenceError):
    """Inverse Laplace evaluation could not certify the requested accuracy."""


class InstabilityError(KerrBathError, RuntimeError):
    """The response function exceeded the configured magnitude bound."""


class GridTooCoarse(ConvergenceError):
    """Halving the time step moves the result by more than the tolerance."""
