"""Action, swept-area, world-line length and worldsheet-area functionals.

Every quadrature works on an O(1) dimensionless integrand and is rescaled
by its physical prefactor afterwards, so the same tolerances behave
identically in SI and natural units.

Sign convention: the free-particle action is negative, S = -m0 c^2 tau,
while the swept area is positive. The proportionality between them is
stated on magnitudes, |S| = (m0^2 c^2 / h) A.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InputError, NumericalError
from .quadrature import DEFAULT_QUADRATURE, FunctionalResult, integrate_1d, integrate_2d, simpson_2d
from .quantities import (
    Particle,
    UnitSystem,
    check_speed,
    lorentz_factor,
    proportionality_constant,
    relativistic_mass,
)
from .trajectory import Trajectory, Worldsheet, is_monotone, minkowski_dot

V_FLOOR_FRACTION = 1e-3
RADICAND_CLAMP = 1e-12


def _units(tr: Trajectory, u: UnitSystem | None):
    if u is None:
        return tr.units
    if u != tr.units:
        raise InputError("unit system differs from the one the trajectory was built with")
    return u


def de_broglie_length(p: Particle, v, u: UnitSystem):
    """De Broglie radius h / (2 pi m v) with the speed-dependent mass m."""
    v = check_speed(v, u)
    if v == 0.0:
        raise DomainError("zero-velocity De Broglie radius is undefined")
    return u.h / (2.0 * math.pi * relativistic_mass(p, v, u) * abs(v))


SWEEP_COLUMNS = ("v", "lambda_B", "gamma", "dA_dt", "dS_dt")


def speed_features(v, p: Particle, u: UnitSystem):
    """Per-speed row (lambda_B, gamma, dA/dt, dS/dt); the last two are the area and action rates."""
    gamma = lorentz_factor(v, u)
    return (de_broglie_length(p, v, u), gamma, u.h / (p.rest_mass * gamma),
            -p.rest_mass * u.c * u.c / gamma)


def _proper_time_rate(v, c):
    beta = v / c
    return math.sqrt((1.0 - beta) * (1.0 + beta))


def proper_time(tr: Trajectory, q=DEFAULT_QUADRATURE) -> FunctionalResult:
    c = tr.units.c
    vel = tr.velocity
    return integrate_1d(lambda t: _proper_time_rate(vel(t), c), tr.t_start, tr.t_end, q)


def swept_area_temporal(tr: Trajectory, p: Particle, u: UnitSystem | None = None,
                        q=DEFAULT_QUADRATURE) -> FunctionalResult:
    """Area swept by the De Broglie sphere, integrated in time: A = int h/m dt."""
    u = _units(tr, u)
    m0 = p.rest_mass
    vel = tr.velocity
    # integrand m0/m(v), rescaled by h/m0
    res = integrate_1d(lambda t: m0 / relativistic_mass(p, vel(t), u), tr.t_start, tr.t_end, q)
    return res.scaled(u.h / m0, u.unit_label("area"))


def swept_area_spatial(tr: Trajectory, p: Particle, u: UnitSystem | None = None,
                       q=DEFAULT_QUADRATURE, v_floor=None) -> FunctionalResult:
    """Swept area integrated over position: A = int 2 pi Lambda_B dx from x_i to x_f.

    Needs a monotone trajectory whose speed never drops below ``v_floor``
    (default 1e-3 c); each abscissa x is mapped back to t by root finding.
    """
    u = _units(tr, u)
    v_floor = V_FLOOR_FRACTION * u.c if v_floor is None else float(v_floor)
    if not is_monotone(tr, tr.n_check):
        raise DomainError("non-monotone trajectory: spatial swept area is undefined")
    vmin = tr.min_speed()
    if vmin < v_floor:
        raise DomainError(f"velocity below v_floor: min |v| = {vmin!r} < {v_floor!r}")
    t0, t1 = tr.t_start, tr.t_end
    x0, x1 = tr.position(t0), tr.position(t1)
    lo, hi = min(x0, x1), max(x0, x1)
    xtol = 1e-14 * max(1.0, abs(t0), abs(t1))
    pos = tr.position

    def time_at(x):
        if x == x0:
            return t0
        if x == x1:
            return t1
        return brentq(lambda t: pos(t) - x, t0, t1, xtol=xtol, rtol=4 * np.finfo(float).eps)

    scale = u.h / p.rest_mass

    def integrand(x):
        lam = de_broglie_length(p, tr.velocity(time_at(x)), u)
        return 2.0 * math.pi * lam / scale

    res = integrate_1d(integrand, lo, hi, q)
    return res.scaled(scale, u.unit_label("area"))


def relativistic_action(tr: Trajectory, p: Particle, u: UnitSystem | None = None,
                        q=DEFAULT_QUADRATURE) -> FunctionalResult:
    """S = -m0 c^2 int sqrt(1 - v^2/c^2) dt (always <= 0)."""
    u = _units(tr, u)
    c = u.c
    vel = tr.velocity
    res = integrate_1d(lambda t: _proper_time_rate(vel(t), c), tr.t_start, tr.t_end, q)
    return res.scaled(-p.rest_mass * c * c, u.unit_label("action"))


def worldline_length(tr: Trajectory, u: UnitSystem | None = None,
                     q=DEFAULT_QUADRATURE) -> FunctionalResult:
    """Minkowski length L = int ds = int c / gamma dt."""
    u = _units(tr, u)
    vel = tr.velocity
    res = integrate_1d(lambda t: 1.0 / lorentz_factor(vel(t), u), tr.t_start, tr.t_end, q)
    return res.scaled(u.c, u.unit_label("length"))


# ---------------------------------------------------------------------------
# Nambu-Goto

def _radicand(xd, xp):
    dd = minkowski_dot(xd, xd)
    pp = minkowski_dot(xp, xp)
    dp = minkowski_dot(xd, xp)
    # euclidean magnitudes set the round-off scale for the clamp
    scale = np.sum(xd * xd, axis=0) * np.sum(xp * xp, axis=0)
    return dp * dp - dd * pp, scale


def _sqrt_radicand(rad, scale, T, S):
    floor = -RADICAND_CLAMP * np.maximum(scale, 1.0)
    bad = rad < floor
    if np.any(bad):
        i = tuple(np.argwhere(bad)[0])
        point = (float(np.asarray(T)[i]), float(np.asarray(S)[i]))
        raise NumericalError(
            f"negative Nambu-Goto radicand {float(rad[i])!r} at (tau, sigma) = {point!r}: "
            "spacelike or degenerate worldsheet")
    return np.sqrt(np.maximum(rad, 0.0))


def nambu_goto_area(ws: Worldsheet, q=DEFAULT_QUADRATURE) -> FunctionalResult:
    """Worldsheet area: integral of sqrt((X_dot . X')^2 - X_dot^2 X'^2) dsigma dtau."""
    if ws.grid is not None:
        return _grid_area(ws)

    def integrand(T, S):
        xd, xp = ws.tangents(T, S)
        rad, scale = _radicand(xd, xp)
        return _sqrt_radicand(rad, scale, T, S)

    return integrate_2d(integrand, (ws.tau_range, ws.sigma_range), q)


def _grid_area(ws):
    tau, sigma, _ = ws.grid
    xd, xp = ws.grid_tangents()
    rad, scale = _radicand(xd, xp)
    T, S = np.meshgrid(tau, sigma, indexing="ij")
    vals = _sqrt_radicand(rad, scale, T, S)
    et, es = tau[-1] - tau[0], sigma[-1] - sigma[0]
    value = simpson_2d(vals, et, es)
    nt, ns = tau.size - 1, sigma.size - 1
    if nt % 4 == 0 and ns % 4 == 0:
        err = abs(value - simpson_2d(vals[::2, ::2], et, es)) / 15.0
    else:
        # conservative fallback: Simpson vs trapezoid on the same nodes
        trap = np.trapezoid(np.trapezoid(vals, sigma, axis=1), tau)
        err = abs(value - trap)
    return FunctionalResult(value, err, vals.size, True)


def nambu_goto_action(ws: Worldsheet, tension, q=DEFAULT_QUADRATURE) -> FunctionalResult:
    tension = float(tension)
    if not (math.isfinite(tension) and tension > 0):
        raise InputError(f"string tension must be positive, got {tension!r}")
    return nambu_goto_area(ws, q).scaled(tension)


# ---------------------------------------------------------------------------
# the identity check

@dataclass(frozen=True)
class ActionReport:
    action_S: float
    area_A: float
    constant_k: float
    identity_residual: float | None
    worldline_length_L: float
    mass: float
    converged: bool = True
    S_error: float = 0.0
    A_error: float = 0.0

    FIELDS = ("mass", "action_S", "area_A", "constant_k", "kA", "identity_residual",
              "worldline_length_L")

    @property
    def kA(self):
        return self.constant_k * self.area_A

    def as_dict(self):
        d = asdict(self)
        d["kA"] = self.kA
        return d

    def to_text(self):
        """Flat ``key=value`` block, one entry per line."""
        d = self.as_dict()
        lines = [f"{k}={_fmt(d[k])}" for k in self.FIELDS]
        lines.append(f"converged={str(self.converged).lower()}")
        return "\n".join(lines) + "\n"

    def csv_header(self):
        return ",".join(self.FIELDS)

    def to_csv_row(self):
        d = self.as_dict()
        return ",".join(_fmt(d[k]) for k in self.FIELDS)


def _fmt(v):
    if v is None:
        return "undefined"
    return format(float(v), ".17g")


def verify_identity(tr: Trajectory, p: Particle, u: UnitSystem | None = None,
                    q=DEFAULT_QUADRATURE) -> ActionReport:
    """Evaluate S, A, k and L independently and report | |S| h/(m0^2 c^2 A) - 1 |."""
    u = _units(tr, u)
    S = relativistic_action(tr, p, u, q)
    A = swept_area_temporal(tr, p, u, q)
    L = worldline_length(tr, u, q)
    k = proportionality_constant(p, u)
    if A.value > 0:
        residual = abs(abs(S.value) * u.h / ((p.rest_mass * u.c) ** 2 * A.value) - 1.0)
    else:
        residual = None
    return ActionReport(S.value, A.value, k, residual, L.value, p.rest_mass,
                        S.converged and A.converged and L.converged,
                        S.abs_error_estimate, A.abs_error_estimate)
