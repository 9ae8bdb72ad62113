"""Relativistic point-particle action as the area swept by a De Broglie sphere."""

from .errors import (
    DomainError,
    InputError,
    NumericalError,
    QuadratureError,
    SpeedLimitError,
    SurfactionError,
)
from .functionals import (
    ActionReport,
    de_broglie_length,
    nambu_goto_action,
    nambu_goto_area,
    relativistic_action,
    swept_area_spatial,
    swept_area_temporal,
    verify_identity,
    worldline_length,
)
from .quadrature import (
    AdaptiveSimpson,
    CompositeSimpson,
    FunctionalResult,
    integrate_1d,
    integrate_2d,
)
from .quantities import (
    NATURAL,
    SI,
    Particle,
    UnitMode,
    UnitSystem,
    compton_length,
    proportionality_constant,
    relativistic_mass,
)
from .trajectory import Trajectory, Worldsheet, is_monotone, resample, velocity_at
from .variational import Objective, PathVariable, discrete_objective, gradient, optimize

__version__ = "0.1.0"


def __getattr__(name):
    # scikit-learn is slow to import; load the estimators on first use
    if name in ("DeBroglieFeatures", "StationaryPath"):
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "ActionReport",
    "AdaptiveSimpson",
    "CompositeSimpson",
    "DeBroglieFeatures",
    "DomainError",
    "FunctionalResult",
    "InputError",
    "NATURAL",
    "NumericalError",
    "Objective",
    "Particle",
    "PathVariable",
    "QuadratureError",
    "SI",
    "SpeedLimitError",
    "StationaryPath",
    "SurfactionError",
    "Trajectory",
    "UnitMode",
    "UnitSystem",
    "Worldsheet",
    "compton_length",
    "de_broglie_length",
    "discrete_objective",
    "gradient",
    "integrate_1d",
    "integrate_2d",
    "is_monotone",
    "nambu_goto_action",
    "nambu_goto_area",
    "optimize",
    "proportionality_constant",
    "relativistic_action",
    "relativistic_mass",
    "resample",
    "swept_area_spatial",
    "swept_area_temporal",
    "velocity_at",
    "verify_identity",
    "worldline_length",
]
