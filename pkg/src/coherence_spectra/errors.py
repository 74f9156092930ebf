"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CoherenceError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(CoherenceError, ValueError):
    """Shapes are inconsistent or exceed the configured cap."""


class ValidationError(CoherenceError, ValueError):
    """An input fails a structural or physical validity check.

    ``violations`` names each failed condition so callers (and the CLI) can
    report exactly what went wrong.
    """

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class NotVacuumPreservingError(ValidationError):
    def __init__(self, magnitude: float):
        super().__init__(
            f"channel is not vacuum preserving (max deviation {magnitude:.3e})",
            ["vacuum_preserving"],
        )
        self.magnitude = magnitude


class VacuumCompatibilityError(ValidationError):
    """Linear-optics setup fails the ancilla vacuum-compatibility test."""

    def __init__(self, offending_modes: list[int]):
        super().__init__(
            f"ancilla state is not annihilated by coupled modes {offending_modes}",
            ["ancilla_vacuum_compatible"],
        )
        self.offending_modes = list(offending_modes)


class PhysicsError(CoherenceError):
    """Numerical or physical consistency failure during a simulation."""

    def __init__(self, message: str, point_index: int | None = None):
        if point_index is not None:
            message = f"grid point {point_index}: {message}"
        super().__init__(message)
        self.point_index = point_index
