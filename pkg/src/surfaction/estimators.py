"""scikit-learn compatible front ends.

``DeBroglieFeatures`` is a stateless transformer mapping speeds to the
per-speed quantities (De Broglie radius, Lorentz factor, swept-area and
action rates). ``StationaryPath`` fits a fixed-endpoint extremal path to
an initial guess and predicts positions on it. Both follow the usual
estimator contract (``get_params``/``set_params``, trailing-underscore
fitted attributes) so they can sit in pipelines and grid searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DomainError, InputError, SpeedLimitError
from .functionals import SWEEP_COLUMNS, speed_features
from .quantities import Particle, UnitSystem
from .variational import Objective, OptimizeSettings, PathVariable, optimize

def make_units(units="natural", h=None, c=None):
    if isinstance(units, UnitSystem):
        return units
    return UnitSystem.from_name(units, h=h, c=c)


def check_speeds(X, c):
    """Validate a speed column: shape (n, 1), finite, 0 < |v| < c."""
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] != 1:
        raise InputError(f"expected a single speed column, got {X.shape[1]} columns")
    speed = np.abs(X[:, 0])
    if np.any(speed >= c):
        raise SpeedLimitError(f"speed limit violated: max |v| = {float(speed.max())!r} >= c", speed=float(speed.max()), c=c)
    if np.any(speed == 0):
        raise DomainError("zero-velocity De Broglie radius is undefined")
    return X


def check_path_samples(X):
    """Validate (t, x) samples of a path: two columns, >= 2 rows, increasing t."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if X.shape[1] != 2:
        raise InputError(f"expected columns (t, x), got {X.shape[1]} columns")
    if np.any(np.diff(X[:, 0]) <= 0):
        raise InputError("path sample times must be strictly increasing")
    return X


class DeBroglieFeatures(TransformerMixin, BaseEstimator):
    """Speed -> (lambda_B, gamma, dA/dt, dS/dt) for a particle of given rest mass."""

    def __init__(self, mass=1.0, units="natural", h=None, c=None):
        self.mass = mass
        self.units = units
        self.h = h
        self.c = c

    def fit(self, X, y=None):
        self.units_ = make_units(self.units, self.h, self.c)
        self.particle_ = Particle(self.mass)
        X = check_speeds(X, self.units_.c)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "particle_")
        X = check_speeds(X, self.units_.c)
        u, p = self.units_, self.particle_
        rows = [speed_features(v, p, u) for v in X[:, 0]]
        return np.array(rows, dtype=float).reshape(-1, 4)

    def get_feature_names_out(self, input_features=None):
        return np.array(SWEEP_COLUMNS[1:], dtype=object)


class StationaryPath(BaseEstimator):
    """Extremal path between the first and last rows of ``X``.

    ``X`` holds (t, x) samples of an initial guess. It is linearly
    interpolated onto ``n_intervals`` uniform steps, then optimized with
    pinned endpoints. ``predict`` takes times (first column if 2-D) and
    interpolates the fitted path.
    """

    def __init__(self, objective="action", n_intervals=32, mass=1.0, units="natural",
                 v_max=None, grad_tol=1e-10, max_iter=100_000):
        self.objective = objective
        self.n_intervals = n_intervals
        self.mass = mass
        self.units = units
        self.v_max = v_max
        self.grad_tol = grad_tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_path_samples(X)
        u = make_units(self.units)
        t = np.linspace(X[0, 0], X[-1, 0], int(self.n_intervals) + 1)
        x = np.interp(t, X[:, 0], X[:, 1])
        pv = PathVariable.straight(t[0], X[0, 1], t[-1], X[-1, 1], int(self.n_intervals),
                                   self.v_max, u)
        pv = pv.with_interior(x[1:-1])
        res = optimize(pv, Objective(self.objective), Particle(self.mass), u,
                       OptimizeSettings(grad_tol=self.grad_tol, max_iter=int(self.max_iter)))
        self.result_ = res
        self.t_ = res.path.t
        self.x_ = res.path.x
        self.objective_value_ = res.objective
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        return self

    def predict(self, X):
        check_is_fitted(self, "x_")
        T = check_array(X, ensure_2d=False, dtype=np.float64)
        T = T[:, 0] if T.ndim == 2 else T
        return np.interp(T, self.t_, self.x_)
