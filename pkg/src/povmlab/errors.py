"""Exception types and the numerical tolerance record shared by all modules."""
from dataclasses import dataclass


class InvalidDimensionError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class NumericalGuardError(RuntimeError):
    """Raised when two routes to the same quantity disagree beyond tolerance."""


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-12
    state: float = 1e-10
    boundary: float = 1e-12


TOL = Tolerances()
