"""Physical constants, unit systems and the point-particle model.

Two unit modes exist. ``SI`` carries injectable values of h and c (CODATA
defaults); ``Natural`` fixes h = c = 1, so speeds are fractions of c.
Every speed argument in the package is expressed in the units of the
active system.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InputError, SpeedLimitError

PLANCK_SI = 6.62607015e-34  # J s, exact since 2019
LIGHT_SPEED_SI = 299792458.0  # m/s, exact


class UnitMode(str, enum.Enum):
    SI = "si"
    NATURAL = "natural"


@dataclass(frozen=True)
class UnitSystem:
    h: float = 1.0
    c: float = 1.0
    mode: UnitMode = UnitMode.NATURAL

    def __post_init__(self):
        mode = UnitMode(self.mode)
        object.__setattr__(self, "mode", mode)
        h, c = float(self.h), float(self.c)
        if not (math.isfinite(h) and h > 0):
            raise InputError(f"Planck constant must be positive and finite, got {self.h!r}")
        if not (math.isfinite(c) and c > 0):
            raise InputError(f"speed of light must be positive and finite, got {self.c!r}")
        if mode is UnitMode.NATURAL and (h != 1.0 or c != 1.0):
            raise InputError("natural units require h = c = 1")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "c", c)

    @classmethod
    def si(cls, h=PLANCK_SI, c=LIGHT_SPEED_SI):
        return cls(h=h, c=c, mode=UnitMode.SI)

    @classmethod
    def natural(cls):
        return cls()

    @classmethod
    def from_name(cls, name, h=None, c=None):
        """Build a unit system from its CLI name (``si`` or ``natural``)."""
        mode = UnitMode(str(name).lower())
        if mode is UnitMode.NATURAL:
            if h not in (None, 1.0) or c not in (None, 1.0):
                raise InputError("constants cannot be overridden in natural units")
            return cls.natural()
        return cls.si(h=PLANCK_SI if h is None else h,
                      c=LIGHT_SPEED_SI if c is None else c)

    def unit_label(self, kind):
        if self.mode is UnitMode.NATURAL:
            return "natural"
        return {"action": "J*s", "area": "m^2", "length": "m",
                "mass": "kg", "speed": "m/s", "time": "s",
                "action/area": "J*s/m^2"}[kind]


NATURAL = UnitSystem.natural()
SI = UnitSystem.si()


@dataclass(frozen=True)
class Particle:
    rest_mass: float

    def __post_init__(self):
        m = float(self.rest_mass)
        if not (math.isfinite(m) and m > 0):
            raise InputError(f"rest mass must be positive and finite, got {self.rest_mass!r}")
        object.__setattr__(self, "rest_mass", m)


def check_speed(v, u: UnitSystem):
    v = float(v)
    if not math.isfinite(v):
        raise InputError(f"speed must be finite, got {v!r}")
    if abs(v) >= u.c:
        raise SpeedLimitError(f"speed limit violated: |v|={abs(v)!r} >= c={u.c!r}",
                              speed=v, c=u.c)
    return v


def lorentz_factor(v, u: UnitSystem):
    """gamma = 1/sqrt(1 - v^2/c^2) for |v| < c."""
    beta = check_speed(v, u) / u.c
    return 1.0 / math.sqrt((1.0 - beta) * (1.0 + beta))


def compton_length(p: Particle, u: UnitSystem):
    """Compton length h/(m0 c)."""
    return u.h / (p.rest_mass * u.c)


def relativistic_mass(p: Particle, v, u: UnitSystem):
    """Speed-dependent mass m0/sqrt(1 - v^2/c^2); raises SpeedLimitError for |v| >= c."""
    return p.rest_mass * lorentz_factor(v, u)


def proportionality_constant(p: Particle, u: UnitSystem):
    """Action per unit swept area, m0^2 c^2 / h."""
    mc = p.rest_mass * u.c
    return mc * mc / u.h
