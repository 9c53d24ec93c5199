"""Physical constants, red-shifted frequencies and the dilation phase."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants. ``g`` is the local gravitational acceleration."""

    g: float = 9.81
    c: float = 299_792_458.0
    hbar: float = 1.054_571_817e-34
    kB: float = 1.380_649e-23

    def __post_init__(self):
        for name in ("g", "c", "hbar", "kB"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")

    @property
    def coupling(self) -> float:
        """Coupling scale g/c^2 in 1/m."""
        return self.g / self.c**2


@dataclass(frozen=True)
class Scenario:
    """Height separation between the two branches of the centre of mass."""

    deltaX: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not math.isfinite(self.deltaX):
            raise ValueError(f"deltaX must be finite, got {self.deltaX!r}")

    def phase_rate(self, omega):
        """d(phase)/dt for a mode of angular frequency ``omega`` (rad/s)."""
        return self.constants.g * abs(self.deltaX) * omega / self.constants.c**2


def redshifted_frequency(omega, X, constants: PhysicalConstants | None = None):
    """Frequency of a mode seen at height ``X`` in a homogeneous field."""
    constants = constants or PhysicalConstants()
    return (1.0 + constants.g * X / constants.c**2) * omega


def phase(omega, t, scenario: Scenario):
    """Dilation phase difference ``g |dX| omega t / c^2`` accumulated by one mode.

    Works elementwise on numpy arrays.
    """
    return scenario.phase_rate(omega) * t
