"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SurfactionError(Exception):
    """Base class for all package errors."""


class InputError(SurfactionError, ValueError):
    """Invalid user input (bad parameters, files, expressions)."""


class SpeedLimitError(InputError):
    """A speed reached or exceeded the speed of light."""

    def __init__(self, message, speed=None, t=None, c=None):
        super().__init__(message)
        self.speed = speed
        self.t = t
        self.c = c

    @property
    def lightlike(self):
        """True when the offending speed equals c up to round-off."""
        if self.speed is None or self.c is None:
            return False
        return abs(abs(self.speed) - self.c) <= 1e-12 * self.c


class DomainError(InputError):
    """A quantity is undefined at the requested point."""


class NumericalError(SurfactionError, ArithmeticError):
    """A numerical procedure failed (non-finite values, no convergence)."""


class QuadratureError(NumericalError):
    """Integrand returned a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
