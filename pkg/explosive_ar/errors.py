"""Exception hierarchy for explosive-ar.

Every error carries the process exit code the CLI uses for it.
"""

from typing import Any


class ExplosiveARError(Exception):
    """Base error."""
    exit_code: int = 1

    def __init__(self, message: str, details: Any = None):
        self.message = message
        self.details = details
        super().__init__(message)


# ----- Invalid input (exit 2) -----

class InvalidInputError(ExplosiveARError):
    exit_code = 2


class DegenerateTheta(InvalidInputError):
    """theta_d == 0, so B(theta) is singular."""


class WrongOrder(InvalidInputError):
    pass


class BadSpec(InvalidInputError):
    pass


class PathTooShort(InvalidInputError):
    pass


class LagTooLarge(InvalidInputError):
    pass


class BadH(InvalidInputError):
    pass


class DimensionMismatch(InvalidInputError):
    pass


class ConfigError(InvalidInputError):
    pass


# ----- Region violations (exit 3) -----

class RegionViolation(ExplosiveARError):
    exit_code = 3


class NotPurelyExplosive(RegionViolation):
    pass


class NotStable(RegionViolation):
    pass


# ----- Numerical failures (exit 4) -----

class NumericalError(ExplosiveARError):
    exit_code = 4


class NumericalFailure(NumericalError):
    pass


class HorizonOverflow(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class PatternViolation(NumericalError):
    pass


class RankZero(NumericalError):
    pass
