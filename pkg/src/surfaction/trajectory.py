"""One-dimensional world lines x(t) and 4-D worldsheets.

A :class:`Trajectory` is either *analytic* (an expression from
:mod:`surfaction.trajexpr`, differentiated exactly) or *sampled*
(strictly increasing ``t`` nodes). Sampled velocities use centered
differences at interior nodes, second-order one-sided differences at the
ends, and monotone cubic (PCHIP) interpolation in between.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import trajexpr
from .errors import DomainError, InputError, SpeedLimitError
from .quantities import NATURAL, UnitSystem

DEFAULT_COLLOCATION = 1024


class Trajectory:
    """Immutable world line on ``[t_start, t_end]``.

    Construction checks ``|v| < c`` on a collocation grid of ``n_check``
    points (plus every node of a sampled source) and raises
    :class:`SpeedLimitError` otherwise.
    """

    def __init__(self, *, expr=None, t_start=None, t_end=None, t=None, x=None,
                 units: UnitSystem = NATURAL, n_check: int = DEFAULT_COLLOCATION):
        if not isinstance(units, UnitSystem):
            raise InputError("units must be a UnitSystem")
        self.units = units
        self.n_check = int(n_check)
        if self.n_check < 2:
            raise InputError("n_check must be >= 2")
        if expr is not None:
            if isinstance(expr, str):
                expr = trajexpr.parse(expr)
            self.kind = "analytic"
            self.expr = expr
            self.derivative = trajexpr.differentiate(expr)
            self._x = trajexpr.compile_expr(expr, units)
            self._v = trajexpr.compile_expr(self.derivative, units)
            if t_start is None or t_end is None:
                raise InputError("analytic trajectory needs t_start and t_end")
            self.t_start, self.t_end = float(t_start), float(t_end)
            if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
                raise InputError("time bounds must be finite")
            if not self.t_start < self.t_end:
                raise InputError(f"need t_start < t_end, got [{self.t_start!r}, {self.t_end!r}]")
            if t is not None:
                nodes = np.asarray(t, dtype=float)
                nodes.setflags(write=False)
                self.t = nodes
                self.x = np.array([self._x(float(s)) for s in nodes])
            else:
                self.t = self.x = None
        else:
            if t is None or x is None:
                raise InputError("trajectory needs either expr or sample arrays t and x")
            t = np.array(t, dtype=float).ravel()
            x = np.array(x, dtype=float).ravel()
            if t.shape != x.shape:
                raise InputError(f"t and x lengths differ: {t.size} vs {x.size}")
            if t.size < 3:
                raise InputError(f"sampled trajectory needs at least 3 points, got {t.size}")
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
                raise InputError("sample values must be finite")
            if np.any(np.diff(t) <= 0):
                i = int(np.argmax(np.diff(t) <= 0))
                raise InputError(f"sample times must be strictly increasing (row {i + 2})")
            self.kind = "sampled"
            self.expr = self.derivative = None
            self.t_start, self.t_end = float(t[0]), float(t[-1])
            self.t, self.x = t, x
            self.node_velocity = np.gradient(x, t, edge_order=2)
            self._xi = PchipInterpolator(t, x)
            self._vi = PchipInterpolator(t, self.node_velocity)
            self.node_velocity.setflags(write=False)
        if self.x is not None:
            self.t.setflags(write=False)
            self.x.setflags(write=False)
        self._check_speed_limit()

    # -- constructors -------------------------------------------------------

    @classmethod
    def analytic(cls, expr, t_start, t_end, units=NATURAL, **kw):
        return cls(expr=expr, t_start=t_start, t_end=t_end, units=units, **kw)

    @classmethod
    def sampled(cls, t, x, units=NATURAL, **kw):
        return cls(t=t, x=x, units=units, **kw)

    @classmethod
    def from_csv(cls, path, units=NATURAL, **kw):
        t, x = read_csv(path)
        return cls(t=t, x=x, units=units, **kw)

    # -- evaluation ---------------------------------------------------------

    @property
    def duration(self):
        return self.t_end - self.t_start

    def _check_time(self, t):
        t = float(t)
        slack = 1e-12 * max(abs(self.t_start), abs(self.t_end), self.duration)
        if not (self.t_start - slack <= t <= self.t_end + slack):
            raise DomainError(f"t={t!r} outside trajectory domain [{self.t_start!r}, {self.t_end!r}]")
        return min(max(t, self.t_start), self.t_end)

    def position(self, t):
        t = self._check_time(t)
        if self.kind == "analytic":
            return self._x(t)
        return float(self._xi(t))

    def velocity(self, t):
        t = self._check_time(t)
        if self.kind == "analytic":
            return self._v(t)
        return float(self._vi(t))

    def collocation(self, n=None):
        return np.linspace(self.t_start, self.t_end, self.n_check if n is None else int(n))

    def velocities(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.kind == "sampled":
            return self._vi(np.clip(ts, self.t_start, self.t_end))
        return np.array([self._v(float(s)) for s in ts])

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.kind == "sampled":
            return self._xi(np.clip(ts, self.t_start, self.t_end))
        return np.array([self._x(float(s)) for s in ts])

    def _check_speed_limit(self):
        ts = self.collocation()
        v = self.velocities(ts)
        if self.kind == "sampled":
            ts = np.concatenate([ts, self.t])
            v = np.concatenate([v, self.node_velocity])
        if self.kind == "analytic":
            # positions must be defined too
            self.positions(ts)
        if not np.all(np.isfinite(v)):
            i = int(np.argmax(~np.isfinite(v)))
            raise DomainError(f"velocity undefined at t={float(ts[i])!r}")
        i = int(np.argmax(np.abs(v)))
        if abs(v[i]) >= self.units.c:
            raise SpeedLimitError(
                f"speed limit violated: |v|={float(abs(v[i]))!r} >= c={self.units.c!r} at t={float(ts[i])!r}",
                speed=float(v[i]), t=float(ts[i]), c=self.units.c)

    def max_speed(self, n=None):
        return float(np.max(np.abs(self.velocities(self.collocation(n)))))

    def min_speed(self, n=None):
        return float(np.min(np.abs(self.velocities(self.collocation(n)))))

    def nodes(self, n=None):
        """Sample nodes ``(t, x)``; analytic sources without a grid use ``n`` points."""
        if self.t is not None and n is None:
            return self.t, self.x
        ts = self.collocation(DEFAULT_COLLOCATION if n is None else n)
        return ts, self.positions(ts)

    def to_csv(self, path=None, n=None):
        t, x = self.nodes(n)
        return write_csv(path, t, x)

    def __repr__(self):
        src = f"expr={trajexpr.to_string(self.expr)!r}" if self.kind == "analytic" else f"n={self.t.size}"
        return f"Trajectory({self.kind}, {src}, t=[{self.t_start!r}, {self.t_end!r}])"


def velocity_at(tr: Trajectory, t):
    return tr.velocity(t)


def resample(tr: Trajectory, n: int) -> Trajectory:
    """Trajectory on a uniform grid of ``n`` points.

    Analytic sources keep their expression (the grid is evaluated exactly),
    so functionals of the result are unchanged. Sampled sources are
    interpolated and become a new sampled trajectory.
    """
    n = int(n)
    if n < 3:
        raise InputError(f"resample needs n >= 3, got {n}")
    ts = np.linspace(tr.t_start, tr.t_end, n)
    if tr.kind == "analytic":
        return Trajectory(expr=tr.expr, t_start=tr.t_start, t_end=tr.t_end, t=ts,
                          units=tr.units, n_check=tr.n_check)
    return Trajectory(t=ts, x=tr.positions(ts), units=tr.units, n_check=tr.n_check)


def is_monotone(tr: Trajectory, n: int = DEFAULT_COLLOCATION) -> bool:
    """True iff the velocity keeps one strict sign on a grid of ``n`` points."""
    v = tr.velocities(tr.collocation(n))
    return bool(np.all(v > 0) or np.all(v < 0))


# ---------------------------------------------------------------------------
# CSV: header ``t,x``, one pair per line

def read_csv(path):
    text = Path(path).read_text(encoding="utf-8")
    return parse_csv(text, source=str(path))


def parse_csv(text, source="<csv>"):
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows or [c.strip() for c in rows[0]] != ["t", "x"]:
        raise InputError(f"{source}: expected header 't,x'")
    t, x = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise InputError(f"{source}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            t.append(float(row[0]))
            x.append(float(row[1]))
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a number: {row!r}") from None
    return np.array(t), np.array(x)


def format_float(v):
    return format(float(v), ".17g")


def write_csv(path, t, x):
    """Write ``t,x`` rows at round-trip precision; returns the text."""
    lines = ["t,x"]
    lines += [f"{format_float(a)},{format_float(b)}" for a, b in zip(t, x)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


# ---------------------------------------------------------------------------
# worldsheets

METRIC = np.array([1.0, -1.0, -1.0, -1.0])


def minkowski_dot(a, b):
    """Inner product under (+,-,-,-); component axis first."""
    return np.tensordot(METRIC, np.asarray(a) * np.asarray(b), axes=(0, 0))


class Worldsheet:
    """Map (tau, sigma) -> (X0, X1, X2, X3) on a parameter rectangle.

    ``embedding`` must accept numpy arrays and return an array with the
    component axis first. Tangents come from ``d_tau``/``d_sigma`` when
    supplied, otherwise from a fourth-order central difference.
    """

    def __init__(self, embedding, tau_range, sigma_range, d_tau=None, d_sigma=None, fd_step=1e-3):
        (t0, t1), (s0, s1) = tau_range, sigma_range
        t0, t1, s0, s1 = map(float, (t0, t1, s0, s1))
        if not (t0 < t1 and s0 < s1):
            raise InputError("worldsheet parameter rectangle must have positive extent")
        self.tau_range, self.sigma_range = (t0, t1), (s0, s1)
        self.embedding = embedding
        self._d_tau, self._d_sigma = d_tau, d_sigma
        self.fd_step = float(fd_step)
        self.grid = None

    @classmethod
    def from_grid(cls, tau, sigma, X):
        """Worldsheet sampled on a uniform grid; ``X`` has shape (n_tau, n_sigma, 4)."""
        tau = np.asarray(tau, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        X = np.asarray(X, dtype=float)
        if tau.ndim != 1 or sigma.ndim != 1 or tau.size < 3 or sigma.size < 3:
            raise InputError("worldsheet grid needs at least 3x3 nodes")
        if X.shape != (tau.size, sigma.size, 4):
            raise InputError(f"grid embedding must have shape ({tau.size}, {sigma.size}, 4), got {X.shape}")
        for name, ax in (("tau", tau), ("sigma", sigma)):
            d = np.diff(ax)
            if np.any(d <= 0):
                raise InputError(f"{name} grid must be strictly increasing")
            if not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise InputError(f"{name} grid must be uniform")
        if not np.all(np.isfinite(X)):
            raise InputError("worldsheet grid contains non-finite values")
        ws = cls(None, (tau[0], tau[-1]), (sigma[0], sigma[-1]))
        ws.grid = (tau, sigma, X)
        return ws

    def tangents(self, T, S):
        """Return (X_dot, X_prime), each with the component axis first."""
        if self.grid is not None:
            raise InputError("tangents of a grid worldsheet are only defined at its nodes")
        T = np.asarray(T, dtype=float)
        S = np.asarray(S, dtype=float)
        if self._d_tau is not None:
            xd = np.asarray(self._d_tau(T, S), dtype=float)
        else:
            xd = self._fd(T, S, self.fd_step * (self.tau_range[1] - self.tau_range[0]), axis=0)
        if self._d_sigma is not None:
            xp = np.asarray(self._d_sigma(T, S), dtype=float)
        else:
            xp = self._fd(T, S, self.fd_step * (self.sigma_range[1] - self.sigma_range[0]), axis=1)
        return _broadcast4(xd, T.shape), _broadcast4(xp, T.shape)

    def _fd(self, T, S, h, axis):
        def X(k):
            if axis == 0:
                return _broadcast4(np.asarray(self.embedding(T + k * h, S), dtype=float), T.shape)
            return _broadcast4(np.asarray(self.embedding(T, S + k * h), dtype=float), T.shape)
        return (X(-2) - 8.0 * X(-1) + 8.0 * X(1) - X(2)) / (12.0 * h)

    def grid_tangents(self):
        tau, sigma, X = self.grid
        xd = np.gradient(X, tau, axis=0, edge_order=2)
        xp = np.gradient(X, sigma, axis=1, edge_order=2)
        return np.moveaxis(xd, -1, 0), np.moveaxis(xp, -1, 0)


def _broadcast4(arr, shape):
    arr = np.asarray(arr, dtype=float)
    if arr.shape[0] != 4:
        raise InputError(f"embedding must return 4 components first, got shape {arr.shape}")
    return np.broadcast_to(arr, (4, *shape)) if arr.shape[1:] != shape else arr


def static_string(length, duration, c=1.0):
    """Straight string of given length at rest: X = (c*tau, sigma, 0, 0)."""
    zeros = lambda T, S: np.zeros_like(T * S)  # noqa: E731
    return Worldsheet(
        lambda T, S: np.stack([c * T + 0 * S, S + 0 * T, zeros(T, S), zeros(T, S)]),
        (0.0, duration), (0.0, length),
        d_tau=lambda T, S: np.stack([c + 0 * T * S, zeros(T, S), zeros(T, S), zeros(T, S)]),
        d_sigma=lambda T, S: np.stack([zeros(T, S), 1.0 + 0 * T * S, zeros(T, S), zeros(T, S)]),
    )


def read_grid_csv(path):
    """Grid CSV with header ``tau,sigma,X0,X1,X2,X3``; rows in any order."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    header = [c.strip() for c in rows[0]] if rows else []
    if header != ["tau", "sigma", "X0", "X1", "X2", "X3"]:
        raise InputError(f"{path}: expected header 'tau,sigma,X0,X1,X2,X3'")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError:
        raise InputError(f"{path}: non-numeric value") from None
    if data.ndim != 2 or data.shape[1] != 6:
        raise InputError(f"{path}: expected 6 columns")
    tau = np.unique(data[:, 0])
    sigma = np.unique(data[:, 1])
    if tau.size * sigma.size != data.shape[0]:
        raise InputError(f"{path}: rows do not form a complete rectangular grid")
    X = np.empty((tau.size, sigma.size, 4))
    filled = np.zeros((tau.size, sigma.size), dtype=bool)
    i = np.searchsorted(tau, data[:, 0])
    j = np.searchsorted(sigma, data[:, 1])
    X[i, j] = data[:, 2:]
    filled[i, j] = True
    if not filled.all():
        raise InputError(f"{path}: duplicate grid nodes")
    return Worldsheet.from_grid(tau, sigma, X)
