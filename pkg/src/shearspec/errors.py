"""Exception hierarchy.

Profile errors map to CLI exit code 2, numerical errors to exit code 3.
"""

from __future__ import annotations


class ShearSpecError(Exception):
    """Base class for all package errors."""


class ProfileError(ShearSpecError):
    """The shear profile is unusable."""


class ParseError(ProfileError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class NotMonotone(ProfileError):
    def __init__(self, x2: float, slope: float):
        super().__init__(f"U' = {slope:.6g} <= 0 at x2 = {x2:.12g}")
        self.x2 = x2
        self.slope = slope


class NotSmoothEnough(ProfileError):
    pass


class OutOfRange(ShearSpecError):
    pass


class ConfigError(ShearSpecError):
    pass


class NumericalError(ShearSpecError):
    """A computation could not be completed to the requested accuracy."""


class StepSizeUnderflow(NumericalError):
    pass


class CriticalAtBoundary(NumericalError):
    """c = U(0): y' is log-singular at the surface.

    ``solution`` carries the partial result (y is finite, yp is nan).
    """

    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


class AtU0(NumericalError):
    pass


class Y0Vanishes(NumericalError):
    pass


class PreconditionUnverified(NumericalError):
    pass


class PreconditionFailed(NumericalError):
    pass


class NotInflection(NumericalError):
    pass


class NoRoot(NumericalError):
    pass


class SeedDiverged(NumericalError):
    pass


class LostRoot(NumericalError):
    pass


class DegenerateRoot(NumericalError):
    pass


class ContourThroughZero(NumericalError):
    pass
