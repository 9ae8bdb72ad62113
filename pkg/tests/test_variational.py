import math

import numpy as np
import pytest

from surfaction import NATURAL, InputError, Particle, SpeedLimitError, UnitSystem
from surfaction.variational import (
    Objective,
    OptimizeSettings,
    PathVariable,
    discrete_objective,
    gradient,
    optimize,
)

PROPER_TIME_SIN = 8.5595345722887067904


def random_paths(n_paths=10, seed=1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_paths):
        n = int(rng.integers(4, 40))
        base = PathVariable.straight(0.0, 0.0, 10.0, float(rng.uniform(-6, 6)), n)
        dx = rng.uniform(-0.1, 0.1, n - 1) * base.dt
        out.append(base.with_interior(base.interior + dx))
    return out


def fd_gradient(pv, which, p, u=NATURAL):
    h = 1e-7 * (pv.t_end - pv.t_start)
    g = np.empty(pv.interior.size)
    for k in range(g.size):
        up = pv.interior.copy()
        dn = pv.interior.copy()
        up[k] += h
        dn[k] -= h
        g[k] = (discrete_objective(pv.with_interior(up), which, p, u)
                - discrete_objective(pv.with_interior(dn), which, p, u)) / (2 * h)
    return g


@pytest.mark.parametrize("which, expected", [("action", -8.0), ("area", 8.0)])
def test_straight_line_objective(which, expected, unit_mass):
    pv = PathVariable.straight(0, 0, 10, 6, 10)
    assert discrete_objective(pv, which, unit_mass) == pytest.approx(expected, rel=1e-15)


def test_rest_path(unit_mass):
    pv = PathVariable.straight(0, 2, 5, 2, 8)
    assert discrete_objective(pv, Objective.ACTION, unit_mass) == -5.0


def test_objectives_are_exact_multiples():
    u = UnitSystem.si(h=2.0, c=3.0)
    p = Particle(1.7)
    for pv in random_paths():
        S = discrete_objective(pv, "action", p, u)
        A = discrete_objective(pv, "area", p, u)
        assert S <= 0 <= A
        assert S == pytest.approx(-(p.rest_mass * u.c) ** 2 / u.h * A, rel=1e-14)


def test_straight_line_is_stationary(unit_mass):
    for which in Objective:
        assert np.linalg.norm(gradient(PathVariable.straight(0, 0, 10, 6, 32), which, unit_mass)) < 1e-12


@pytest.mark.parametrize("which", list(Objective))
def test_gradient_matches_finite_differences(which):
    p = Particle(2.0)
    for pv in random_paths():
        g = gradient(pv, which, p)
        fd = fd_gradient(pv, which, p)
        rel = np.abs(g - fd) / np.maximum(np.abs(g), 1e-3 * np.max(np.abs(g)))
        assert np.all(rel < 1e-5)


def test_gradient_pushes_perturbed_node_back(unit_mass):
    pv = PathVariable.straight(0, 0, 10, 6, 10)
    bumped = pv.interior.copy()
    bumped[4] += 0.05
    for which, sign in (("action", 1.0), ("area", -1.0)):
        g = gradient(pv.with_interior(bumped), which, unit_mass)
        # descent direction for S is -g; for A (maximized) it is +g
        assert sign * g[4] > 0
        assert np.sign(g[4]) == np.sign(fd_gradient(pv.with_interior(bumped), which, unit_mass)[4])


def test_gradient_proportionality():
    u = UnitSystem.si(h=0.5, c=2.0)
    p = Particle(3.0)
    factor = -u.h / (p.rest_mass * u.c) ** 2
    for pv in random_paths(seed=5):
        gS = gradient(pv, "action", p, u)
        gA = gradient(pv, "area", p, u)
        assert np.allclose(gA, factor * gS, rtol=1e-12, atol=0)


def test_gradient_at_bound_is_reported(unit_mass):
    pv = PathVariable(0.0, 4.0, 0.0, 0.0, np.array([0.0, 0.0, 0.0]), v_max=2.0)
    steep = pv.with_interior([1.0, 0.0, 0.0])
    with pytest.raises(SpeedLimitError):
        gradient(steep, "action", unit_mass)


def test_path_validation():
    with pytest.raises(InputError):
        PathVariable.straight(0, 0, 10, 6, 3)
    with pytest.raises(SpeedLimitError, match="infeasible endpoints"):
        PathVariable.straight(0, 0, 10, 10, 8)
    with pytest.raises(SpeedLimitError, match="infeasible path"):
        PathVariable.zigzag(0, 0, 10, 6, 32, amplitude=1.0)
    with pytest.raises(InputError):
        PathVariable.straight(1, 0, 1, 0, 8)


def test_default_speed_bound_tracks_units():
    assert PathVariable.straight(0, 0, 1, 0, 4).v_max == 0.99
    si = UnitSystem.si()
    assert PathVariable.straight(0, 0, 1, 0, 4, units=si).v_max == 0.99 * si.c


@pytest.fixture(scope="module")
def zigzag_runs():
    start = PathVariable.zigzag(0, 0, 10, 6, 32, amplitude=0.05)
    p = Particle(1.0)
    return start, {w: optimize(start, w, p, record_history=True) for w in Objective}


@pytest.mark.parametrize("which", list(Objective))
def test_zigzag_converges_to_straight_line(zigzag_runs, which):
    start, runs = zigzag_runs
    r = runs[which]
    assert r.converged and r.gradient_norm <= 1e-10
    assert np.max(np.abs(r.path.x - 0.6 * r.path.t)) < 1e-4 * 6
    expected = -8.0 if which is Objective.ACTION else 8.0
    assert r.objective == pytest.approx(expected, rel=1e-12)


def test_both_objectives_give_the_same_path(zigzag_runs):
    _, runs = zigzag_runs
    a, b = runs[Objective.ACTION].path.x, runs[Objective.AREA].path.x
    assert np.max(np.abs(a - b)) <= 1e-6


def test_endpoints_pinned(zigzag_runs):
    start, runs = zigzag_runs
    for r in runs.values():
        assert r.path.x[0] == start.x[0] and r.path.x[-1] == start.x[-1]
        assert r.path.t_start == start.t_start and r.path.t_end == start.t_end


def test_monotone_descent(zigzag_runs):
    _, runs = zigzag_runs
    for r in runs.values():
        h = np.array(r.history)
        assert h.size == r.iterations + 1
        assert np.all(np.diff(h) <= 0)


def test_stationary_start(unit_mass):
    start = PathVariable.straight(0, 0, 10, 6, 32)
    r = optimize(start, "action", unit_mass)
    assert r.converged and r.iterations <= 2
    assert np.max(np.abs(r.path.x - start.x)) <= 1e-12


def test_deterministic(unit_mass):
    start = PathVariable.zigzag(0, 1, 4, -1, 8, amplitude=0.1)
    a = optimize(start, "area", unit_mass)
    b = optimize(start, "area", unit_mass)
    assert np.array_equal(a.path.x, b.path.x) and a.iterations == b.iterations


def test_budget_exhaustion_is_flagged(unit_mass):
    start = PathVariable.zigzag(0, 0, 10, 6, 32, amplitude=0.05)
    r = optimize(start, "action", unit_mass, settings=OptimizeSettings(max_iter=5))
    assert not r.converged and r.iterations == 5
    assert r.objective < discrete_objective(start, "action", unit_mass)


def test_iterates_stay_feasible_near_bound(unit_mass):
    # fast path: the line search must never step across v_max
    start = PathVariable.zigzag(0, 0, 10, 9.5, 16, amplitude=0.005)
    r = optimize(start, "action", unit_mass)
    assert r.converged
    assert np.max(np.abs(r.path.segment_velocities())) < start.v_max


def test_si_units_converge():
    si = UnitSystem.si()
    start = PathVariable.zigzag(0, 0, 1e-8, 1.2, 8, amplitude=0.01, units=si)
    r = optimize(start, "area", Particle(9.1e-31), si)
    assert r.converged and r.gradient_norm <= 1e-10
    assert np.max(np.abs(r.path.x - 1.2e8 * r.path.t)) < 1e-4 * 1.2


def test_round_off_stall_is_flagged(unit_mass):
    start = PathVariable.zigzag(0, 0, 10, 6, 8, amplitude=0.05)
    r = optimize(start, "action", unit_mass, settings=OptimizeSettings(grad_tol=1e-300))
    assert not r.converged
    assert r.gradient_norm < 1e-12


def test_gradient_norm_is_mass_independent():
    start = PathVariable.zigzag(0, 0, 10, 6, 8, amplitude=0.05)
    a = optimize(start, "area", Particle(1.0), settings=OptimizeSettings(max_iter=3))
    b = optimize(start, "area", Particle(50.0), settings=OptimizeSettings(max_iter=3))
    assert b.gradient_norm == pytest.approx(a.gradient_norm, rel=1e-9)


def test_refinement_free_particle_is_exact(unit_mass):
    # the discrete free-particle optimum is the straight line at every N,
    # so refining N leaves the converged objective unchanged to round-off
    values = []
    for n in (8, 16, 32, 64):
        r = optimize(PathVariable.zigzag(0, 0, 10, 6, n, amplitude=0.02), "action", unit_mass)
        values.append(r.objective)
    assert max(abs(v + 8.0) for v in values) < 1e-12


def test_refinement_order_on_smooth_path(unit_mass):
    # discretization error of the objective on a fixed curved path
    errs = []
    for n in (16, 32, 64, 128):
        t = np.linspace(0, 10, n + 1)
        x = 0.5 * t + 0.2 * np.sin(t)
        pv = PathVariable(0.0, 10.0, 0.0, float(x[-1]), x[1:-1], 0.99)
        errs.append(abs(discrete_objective(pv, "area", unit_mass) - PROPER_TIME_SIN))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8
