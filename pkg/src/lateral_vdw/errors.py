"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations


class LateralVdWError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LateralVdWError, ValueError):
    """An argument lies outside the domain of the operation."""


class OrderingError(DomainError):
    """Principal polarizabilities were not given in ascending order."""


class DegenerateParticleError(DomainError):
    """The integrated polarizability tensor vanishes."""


class ConvergenceError(LateralVdWError, ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    ``estimate`` holds the best error estimate achieved before giving up.
    """

    def __init__(self, message: str, estimate: float = float("nan")):
        super().__init__(message)
        self.estimate = float(estimate)


class NoSignChangeError(LateralVdWError, ValueError):
    """A root bracket does not contain a sign change."""


class TrapDestabilizedError(LateralVdWError, ArithmeticError):
    """The corrugation curvature overwhelms the trap: omega'^2 < 0."""
