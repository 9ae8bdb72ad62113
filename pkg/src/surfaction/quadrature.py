"""Numerical integration: composite and adaptive Simpson in 1-D, tensor Simpson in 2-D."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, QuadratureError


@dataclass(frozen=True)
class CompositeSimpson:
    n_intervals: int = 64

    def __post_init__(self):
        n = self.n_intervals
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
            raise InputError(f"composite Simpson needs an even interval count >= 2, got {n!r}")


@dataclass(frozen=True)
class AdaptiveSimpson:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InputError("quadrature tolerances must be positive")
        if int(self.max_depth) < 1:
            raise InputError("max_depth must be >= 1")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


QuadratureSpec = CompositeSimpson | AdaptiveSimpson  # noqa: UP007 (runtime alias)
DEFAULT_QUADRATURE = AdaptiveSimpson()


def parse_quadrature(text):
    """Parse ``simpson:N`` or ``adaptive:ABS,REL[,DEPTH]``."""
    try:
        kind, _, args = str(text).partition(":")
        kind = kind.strip().lower()
        if kind == "simpson":
            return CompositeSimpson(int(args))
        if kind == "adaptive":
            if not args:
                return AdaptiveSimpson()
            parts = [p for p in args.split(",")]
            abs_tol, rel_tol = float(parts[0]), float(parts[1])
            depth = int(parts[2]) if len(parts) > 2 else 40
            if len(parts) > 3:
                raise ValueError
            return AdaptiveSimpson(abs_tol, rel_tol, depth)
    except (ValueError, IndexError):
        pass
    raise InputError(f"bad quadrature spec {text!r}; use simpson:N or adaptive:ABS,REL")


@dataclass(frozen=True)
class FunctionalResult:
    """Value of an integral together with its error estimate."""

    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool = True
    units: str = ""

    def scaled(self, factor, units=None):
        return FunctionalResult(self.value * factor, self.abs_error_estimate * abs(factor),
                                self.evaluations, self.converged,
                                self.units if units is None else units)

    def __float__(self):
        return float(self.value)


def _checked(f, x):
    try:
        y = f(x)
    except (ArithmeticError, ValueError) as exc:
        raise QuadratureError(f"integrand undefined at x={x!r}: {exc}", point=x) from exc
    try:
        y = float(y)
    except (TypeError, ValueError):
        raise QuadratureError(f"integrand returned a non-scalar at x={x!r}", point=x) from None
    if not math.isfinite(y):
        raise QuadratureError(f"non-finite integrand value {y!r} at x={x!r}", point=x)
    return y


def _simpson_grid(y, h):
    return h / 3.0 * (y[0] + y[-1] + 4.0 * math.fsum(y[1:-1:2]) + 2.0 * math.fsum(y[2:-1:2]))


def _composite(f, a, b, n):
    xs = np.linspace(a, b, n + 1)
    ys = [_checked(f, float(x)) for x in xs]
    return _simpson_grid(ys, (b - a) / n), ys


def integrate_1d(f, a, b, spec=DEFAULT_QUADRATURE):
    """Integrate scalar ``f`` over ``[a, b]``.

    CompositeSimpson(n) returns the n-interval rule; its error estimate
    comes from the 2n-interval rule. AdaptiveSimpson refines the panel with
    the largest local error until the summed Richardson estimate meets
    ``max(abs_tol, rel_tol*|I|)``; panels at ``max_depth`` are frozen and the
    result is flagged unconverged if the target is missed.
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise InputError(f"integration bounds must satisfy a < b, got [{a!r}, {b!r}]")
    if isinstance(spec, CompositeSimpson):
        n = spec.n_intervals
        coarse, ys = _composite(f, a, b, n)
        # fine grid reuses the coarse nodes
        xs_mid = a + (np.arange(n) + 0.5) * ((b - a) / n)
        mids = [_checked(f, float(x)) for x in xs_mid]
        fine_y = [0.0] * (2 * n + 1)
        fine_y[0::2] = ys
        fine_y[1::2] = mids
        fine = _simpson_grid(fine_y, (b - a) / (2 * n))
        err = abs(coarse - fine) * 16.0 / 15.0
        return FunctionalResult(coarse, err, 3 * n + 1)
    if isinstance(spec, AdaptiveSimpson):
        return _adaptive(f, a, b, spec)
    raise InputError(f"unknown quadrature spec {spec!r}")


_MIN_DEPTH = 2  # forced refinement; symmetric integrands can fool the first test


def _adaptive(f, a, b, spec):
    evals = 0
    counter = 0

    def split(a, fa, m, fm, b, fb, whole, depth):
        # heap entry: (-err, order, value, err, depth, panel data...)
        nonlocal evals, counter
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = _checked(f, lm), _checked(f, rm)
        evals += 2
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        diff = left + right - whole
        err = abs(diff) / 15.0
        counter += 1
        halves = ((a, fa, lm, flm, m, fm, left), (m, fm, rm, frm, b, fb, right))
        # insertion order breaks ties deterministically
        return (-err, counter, left + right + diff / 15.0, err, depth, halves)

    fa, fm, fb = _checked(f, a), _checked(f, 0.5 * (a + b)), _checked(f, b)
    evals = 3
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    heap = [split(a, fa, 0.5 * (a + b), fm, b, fb, whole, 1)]
    frozen = []
    total_val, total_err = heap[0][2], heap[0][3]

    def refine(entry):
        nonlocal total_val, total_err
        total_val -= entry[2]
        total_err -= entry[3]
        for half in entry[5]:
            child = split(*half, entry[4] + 1)
            total_val += child[2]
            total_err += child[3]
            heapq.heappush(heap, child)

    while heap:
        shallow = [e for e in heap if e[4] < min(_MIN_DEPTH, spec.max_depth)]
        if not shallow:
            break
        for e in shallow:
            heap.remove(e)
        heapq.heapify(heap)
        for e in shallow:
            refine(e)

    while heap and total_err > spec.tolerance(total_val):
        entry = heapq.heappop(heap)
        if entry[4] >= spec.max_depth:
            frozen.append(entry)
            continue
        refine(entry)

    leaves = heap + frozen
    value = math.fsum(e[2] for e in leaves)
    err = math.fsum(e[3] for e in leaves)
    return FunctionalResult(value, err, evals, err <= spec.tolerance(value))


# ---------------------------------------------------------------------------
# 2-D

def _simpson_weights(n):
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def _point(f, a, b):
    try:
        return float(f(a, b))
    except (ArithmeticError, ValueError):
        return math.nan  # reported with its (tau, sigma) below


def _grid_values(f, t0, t1, s0, s1, n):
    tau = np.linspace(t0, t1, n + 1)
    sig = np.linspace(s0, s1, n + 1)
    T, S = np.meshgrid(tau, sig, indexing="ij")
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(T, S), dtype=float)
        if vals.shape != T.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([[_point(f, float(a), float(b)) for b in sig] for a in tau])
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        point = (float(tau[i]), float(sig[j]))
        raise QuadratureError(
            f"non-finite integrand value at (tau, sigma) = {point!r}", point=point)
    return vals


def simpson_2d(vals, t_extent, s_extent):
    """Tensor-product Simpson sum over a grid with even interval counts."""
    nt, ns = vals.shape[0] - 1, vals.shape[1] - 1
    if nt < 2 or ns < 2 or nt % 2 or ns % 2:
        raise InputError(f"Simpson grid needs an odd number (>= 3) of nodes per axis, got {vals.shape}")
    wt = _simpson_weights(nt) * (t_extent / nt)
    ws = _simpson_weights(ns) * (s_extent / ns)
    return float(wt @ vals @ ws)


def integrate_2d(f, rect, spec=DEFAULT_QUADRATURE):
    """Integrate ``f(tau, sigma)`` over ``rect = ((tau0, tau1), (sigma0, sigma1))``.

    ``f`` is called with 2-D arrays when it supports them, otherwise point by
    point. The error estimate compares the n and 2n tensor grids.
    """
    (t0, t1), (s0, s1) = rect
    t0, t1, s0, s1 = map(float, (t0, t1, s0, s1))
    if not (t0 < t1 and s0 < s1):
        raise InputError(f"parameter rectangle must have positive extent, got {rect!r}")
    dt, ds = t1 - t0, s1 - s0

    def rule(n):
        return simpson_2d(_grid_values(f, t0, t1, s0, s1, n), dt, ds)

    if isinstance(spec, CompositeSimpson):
        n = spec.n_intervals
        coarse, fine = rule(n), rule(2 * n)
        evals = (n + 1) ** 2 + (2 * n + 1) ** 2
        return FunctionalResult(coarse, abs(coarse - fine) * 16.0 / 15.0, evals)
    if isinstance(spec, AdaptiveSimpson):
        n = 8
        n_max = 2 ** min(int(spec.max_depth), 10)
        coarse = rule(n)
        evals = (n + 1) ** 2
        while True:
            n *= 2
            fine = rule(n)
            evals += (n + 1) ** 2
            err = abs(fine - coarse) / 15.0
            if err <= spec.tolerance(fine):
                return FunctionalResult(fine, err, evals, True)
            if n >= n_max:
                return FunctionalResult(fine, err, evals, False)
            coarse = fine
    raise InputError(f"unknown quadrature spec {spec!r}")
