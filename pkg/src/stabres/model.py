"""Model parameters and unit conventions.

Everything is dimensionless: lengths in units of the wall-to-shell distance
``a``, momenta as ``q = k a`` and energies in units of ``hbar^2 / (2 m a^2)``,
so that ``E = q**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNITS = "hbar^2/(2 m a^2)"


@dataclass(frozen=True)
class ShellModel:
    """Delta shell of dimensionless strength ``G = 2 m U a / hbar^2``.

    ``G > 0`` is repulsive, ``G < 0`` attractive, ``G = 0`` the free box.
    """

    G: float
    a: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.G):
            raise ValueError(f"coupling must be finite, got {self.G!r}")
        if self.a != 1.0:
            raise ValueError("internal units fix a = 1")

    @property
    def attractive(self) -> bool:
        return self.G < 0


@dataclass(frozen=True)
class BoxGrid:
    """Uniform grid of box sizes ``c = L / a``."""

    c_min: float
    c_max: float
    steps: int

    def __post_init__(self):
        if not self.c_min > 0:
            raise ValueError("c_min must be positive")
        if not self.c_max > self.c_min:
            raise ValueError("c_max must exceed c_min")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError("steps must be an integer >= 2")

    @classmethod
    def with_density(cls, c_min: float, c_max: float, per_unit: float = 40.0) -> "BoxGrid":
        """Grid holding at least ``per_unit`` samples per unit of ``c``."""
        steps = int(math.ceil((c_max - c_min) * per_unit)) + 1
        return cls(c_min, c_max, max(steps, 2))

    @property
    def spacing(self) -> float:
        return (self.c_max - self.c_min) / (self.steps - 1)

    def values(self) -> np.ndarray:
        return np.linspace(self.c_min, self.c_max, self.steps)


def energy_from_q(q):
    """Energy ``q**2`` of momentum ``q`` (real or complex, scalar or array)."""
    return q * q
