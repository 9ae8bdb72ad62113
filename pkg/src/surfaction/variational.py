"""Fixed-endpoint path optimization of the discrete action and swept area.

Paths live on a uniform time grid of N intervals; only the interior node
positions move. Each segment has constant velocity, so both discrete
objectives reduce to the same sum ``dt * sum_k sqrt(1 - v_k^2/c^2)`` with
different constant prefactors:

    ActionS = -m0 c^2 * sum,    AreaA = (h / m0) * sum

which makes their stationary points identical. ``optimize`` minimizes
ActionS, or -AreaA for the area objective.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputError, SpeedLimitError
from .quantities import NATURAL, Particle, UnitSystem

DEFAULT_VMAX_FRACTION = 0.99


class Objective(str, enum.Enum):
    ACTION = "action"
    AREA = "area"


@dataclass(frozen=True)
class PathVariable:
    """Discretized path with pinned endpoints.

    ``interior`` holds x_1 ... x_{N-1}; ``v_max`` is an absolute speed.
    """

    t_start: float
    t_end: float
    x_start: float
    x_end: float
    interior: np.ndarray
    v_max: float

    def __post_init__(self):
        interior = np.array(self.interior, dtype=float).ravel()
        interior.setflags(write=False)
        object.__setattr__(self, "interior", interior)
        if interior.size + 1 < 4:
            raise InputError(f"path needs N >= 4 intervals, got {interior.size + 1}")
        vals = (self.t_start, self.t_end, self.x_start, self.x_end, self.v_max)
        if not all(math.isfinite(v) for v in vals) or not np.all(np.isfinite(interior)):
            raise InputError("path values must be finite")
        if not self.t_start < self.t_end:
            raise InputError("path needs t_start < t_end")
        if not self.v_max > 0:
            raise InputError("v_max must be positive")
        if abs(self.x_end - self.x_start) / (self.t_end - self.t_start) >= self.v_max:
            raise SpeedLimitError(
                "infeasible endpoints: straight-line speed reaches v_max",
                speed=(self.x_end - self.x_start) / (self.t_end - self.t_start))
        v = self.segment_velocities()
        i = int(np.argmax(np.abs(v)))
        if abs(v[i]) >= self.v_max:
            raise SpeedLimitError(
                f"infeasible path: segment {i} speed {float(abs(v[i]))!r} >= v_max={self.v_max!r}",
                speed=float(v[i]))

    @classmethod
    def straight(cls, t_start, x_start, t_end, x_end, n_intervals, v_max=None, units=NATURAL):
        if not t_start < t_end:
            raise InputError("path needs t_start < t_end")
        t = np.linspace(t_start, t_end, n_intervals + 1)
        slope = (x_end - x_start) / (t_end - t_start)
        x = x_start + slope * (t - t_start)
        return cls(float(t_start), float(t_end), float(x_start), float(x_end), x[1:-1],
                   _vmax(v_max, units))

    @classmethod
    def zigzag(cls, t_start, x_start, t_end, x_end, n_intervals, amplitude,
               v_max=None, units=NATURAL):
        """Straight line with alternating +/- ``amplitude`` offsets on interior nodes."""
        base = cls.straight(t_start, x_start, t_end, x_end, n_intervals, v_max, units)
        signs = np.where(np.arange(1, n_intervals) % 2 == 1, 1.0, -1.0)
        return base.with_interior(base.interior + amplitude * signs)

    @property
    def n_intervals(self):
        return self.interior.size + 1

    @property
    def dt(self):
        return (self.t_end - self.t_start) / self.n_intervals

    @property
    def t(self):
        return np.linspace(self.t_start, self.t_end, self.n_intervals + 1)

    @property
    def x(self):
        return np.concatenate([[self.x_start], self.interior, [self.x_end]])

    def segment_velocities(self):
        return np.diff(self.x) / self.dt

    def with_interior(self, interior):
        return replace(self, interior=interior)


def _vmax(v_max, units):
    return DEFAULT_VMAX_FRACTION * units.c if v_max is None else float(v_max)


def _prefactor(which, p, u):
    which = Objective(which)
    if which is Objective.ACTION:
        return -p.rest_mass * u.c * u.c
    return u.h / p.rest_mass


def _rates(v, c):
    beta = v / c
    return np.sqrt((1.0 - beta) * (1.0 + beta))


def _check_bound(pv, v, u, strict):
    bound = min(pv.v_max, u.c)
    speed = np.abs(v)
    bad = speed >= bound if strict else speed > bound
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SpeedLimitError(f"segment {i} speed {float(speed[i])!r} violates bound {bound!r}",
                              speed=float(v[i]), c=u.c)


def discrete_objective(pv: PathVariable, which, p: Particle, u: UnitSystem = NATURAL) -> float:
    """ActionS (<= 0) or AreaA (>= 0) of the piecewise-linear path."""
    v = pv.segment_velocities()
    _check_bound(pv, v, u, strict=False)
    total = math.fsum(_rates(v, u.c)) * pv.dt
    return _prefactor(which, p, u) * total


def gradient(pv: PathVariable, which, p: Particle, u: UnitSystem = NATURAL) -> np.ndarray:
    """Exact gradient of ``discrete_objective`` with respect to the interior nodes."""
    v = pv.segment_velocities()
    _check_bound(pv, v, u, strict=True)
    # d/dv sqrt(1 - v^2/c^2) = -v / (c^2 sqrt(...))
    dg = -v / (u.c * u.c * _rates(v, u.c))
    return _prefactor(which, p, u) * (dg[:-1] - dg[1:])


@dataclass(frozen=True)
class OptimizeSettings:
    grad_tol: float = 1e-10
    max_iter: int = 100_000
    armijo: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 200


@dataclass(frozen=True)
class OptimizeResult:
    path: PathVariable
    objective: float
    iterations: int
    gradient_norm: float
    converged: bool
    which: Objective = Objective.ACTION
    history: tuple = field(default=(), repr=False)


def optimize(initial: PathVariable, which, p: Particle, u: UnitSystem = NATURAL,
             settings: OptimizeSettings | None = None, record_history=False) -> OptimizeResult:
    """Gradient descent with Armijo backtracking.

    Minimizes ActionS for ``which="action"`` and -AreaA for ``which="area"``.
    Trial points that leave the open feasible set ``|v_k| < v_max`` are
    rejected by the backtracking, so iterates never touch the bound.
    Returns the best point found; ``converged`` is False when the
    iteration budget runs out first or the line search stalls at round-off.

    ``gradient_norm`` (and ``grad_tol``) are measured on the objective
    divided by its prefactor (m0 c^2 or h/m0) with positions in units of c,
    so the stopping rule is the same for both objectives, any mass and
    either unit system.
    """
    which = Objective(which)
    s = settings or OptimizeSettings()
    sign = 1.0 if which is Objective.ACTION else -1.0
    pre = sign * _prefactor(which, p, u)
    c2 = u.c * u.c
    dt = initial.dt
    bound = min(initial.v_max, u.c)
    x0, x1 = initial.x_start, initial.x_end

    def full(interior):
        return np.concatenate(([x0], interior, [x1]))

    def state(interior):
        v = np.diff(full(interior)) / dt
        if np.any(np.abs(v) >= bound):
            return None
        r = _rates(v, u.c)
        dg = -v / (c2 * r)
        return v, r, pre * (dg[:-1] - dg[1:])

    def decrement(old, new, displacement):
        # f(new) - f(old) without cancellation, using
        # r' - r = -dv (2v + dv) / (c^2 (r + r')), dv taken from the node displacement
        v, r, rn = old[0], old[1], new[1]
        dv = np.diff(np.concatenate(([0.0], displacement, [0.0]))) / dt
        return -pre * dt * math.fsum(dv * (2.0 * v + dv) / (c2 * (r + rn)))

    x = initial.interior.copy()
    cur = state(x)
    if cur is None:
        raise SpeedLimitError("initial path violates the speed bound")
    # descend in xi = x / (c D) on f / (|pre| D); both are O(1) in any units
    D = initial.t_end - initial.t_start
    length = u.c * D
    fscale = abs(pre) * D
    gscale = u.c / abs(pre)
    g = cur[2] * gscale
    f = pre * math.fsum(cur[1]) * dt
    gnorm = float(np.linalg.norm(g))
    step = s.initial_step
    history = [f] if record_history else None
    it = 0
    while gnorm > s.grad_tol and it < s.max_iter:
        it += 1
        gg = gnorm * gnorm
        for _ in range(s.max_backtracks):
            trial = x - (step * length) * g
            new = state(trial)
            if new is not None:
                df = decrement(cur, new, trial - x)
                if df / fscale <= -s.armijo * step * gg:
                    break
            step *= s.shrink
        else:
            # no representable decrease left: stalled at round-off, report unconverged
            it -= 1
            break
        x, cur, g = trial, new, new[2] * gscale
        f += df
        gnorm = float(np.linalg.norm(g))
        if record_history:
            history.append(f)
        # warm start the next line search
        step *= 2.0
    f = pre * math.fsum(cur[1]) * dt
    path = initial.with_interior(x)
    return OptimizeResult(path, sign * f, it, gnorm, gnorm <= s.grad_tol, which,
                          tuple(history) if record_history else ())
