"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import BATTERY
from exprgen import generated, random_smooth, random_text
from surfaction import NATURAL, Particle, Trajectory, UnitSystem
from surfaction.cli import main
from surfaction.functionals import (
    nambu_goto_area,
    relativistic_action,
    swept_area_spatial,
    swept_area_temporal,
    verify_identity,
    worldline_length,
)
from surfaction.quadrature import CompositeSimpson, integrate_1d
from surfaction.quantities import compton_length, proportionality_constant
from surfaction.trajectory import Worldsheet, is_monotone, static_string
from surfaction.trajexpr import ExprError, compile_expr, differentiate, parse, to_string
from surfaction.variational import Objective, PathVariable, discrete_objective, gradient, optimize


@pytest.fixture
def report(capsys, request):
    """Record a criterion outcome and print one line whatever happens."""
    box = {}
    yield box
    ok = box.get("ok", False)
    with capsys.disabled():
        print(f"\n[acceptance] {request.node.name}: {'PASS' if ok else 'FAIL'} {box.get('detail', '')}")


def test_criterion_01_identity_battery(report):
    assert len(BATTERY) >= 20
    start = time.perf_counter()
    trajs = [Trajectory.analytic(e, 0.0, 10.0) for e in BATTERY]
    for tr in trajs:
        assert 0.05 < abs(tr.velocities(tr.collocation())).min()
        assert tr.max_speed() < 0.95
    residuals = [verify_identity(tr, Particle(1.0)).identity_residual for tr in trajs]
    elapsed = time.perf_counter() - start
    worst = max(residuals)
    report["detail"] = f"max residual {worst:.2e} over {len(trajs)} trajectories in {elapsed:.2f}s"
    assert worst < 1e-8
    assert elapsed < 1.0
    report["ok"] = True


def test_criterion_02_spatial_vs_temporal(report):
    worst, n = 0.0, 0
    for e in BATTERY:
        tr = Trajectory.analytic(e, 0.0, 10.0)
        if not (is_monotone(tr) and tr.min_speed() >= 1e-3):
            continue
        a = swept_area_temporal(tr, Particle(1.0)).value
        b = swept_area_spatial(tr, Particle(1.0)).value
        worst = max(worst, abs(a - b) / abs(a))
        n += 1
    report["detail"] = f"max relative gap {worst:.2e} on {n} monotone members"
    assert n >= 20
    assert worst < 1e-6
    report["ok"] = True


def test_criterion_03_compton_constant(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for u, lo, hi in ((UnitSystem.si(), -32, -25), (NATURAL, -3, 3)):
        for m in 10.0 ** rng.uniform(lo, hi, 10):
            p = Particle(float(m))
            lam = compton_length(p, u)
            worst = max(worst, abs(proportionality_constant(p, u) / (u.h / lam**2) - 1))
    report["detail"] = f"max relative error {worst:.1e}"
    assert worst <= 1e-15
    report["ok"] = True


def test_criterion_04_closed_forms(report):
    tr = Trajectory.analytic("0.6*t", 0.0, 10.0)
    p = Particle(1.0)
    S = relativistic_action(tr, p).value
    A = swept_area_temporal(tr, p).value
    L = worldline_length(tr).value
    report["detail"] = f"S={S!r} A={A!r} L={L!r}"
    assert abs(S + 8.0) <= 1e-10 and abs(A - 8.0) <= 1e-10 and abs(L - 8.0) <= 1e-10
    report["ok"] = True


def test_criterion_05_scaling_laws(report):
    worst = 0.0
    for e in BATTERY:
        tr = Trajectory.analytic(e, 0.0, 10.0)
        base = verify_identity(tr, Particle(1.0))
        for m in (0.5, 1.0, 2.0, 7.0):
            r = verify_identity(tr, Particle(m))
            worst = max(worst,
                        abs(r.area_A * m / base.area_A - 1),
                        abs(r.action_S / (m * base.action_S) - 1),
                        abs(r.constant_k / (m * m * base.constant_k) - 1))
    report["detail"] = f"max relative deviation {worst:.1e}"
    assert worst <= 1e-10
    report["ok"] = True


def test_criterion_06_nambu_goto(report):
    static = nambu_goto_area(static_string(3.0, 2.0)).value
    collapsed = nambu_goto_area(
        Worldsheet(lambda T, S: np.stack([T, 0 * S, 0 * T, 0 * T]), (0, 2), (0, 3))).value
    reparam = nambu_goto_area(
        Worldsheet(lambda T, S: np.stack([T, S**3 / 9, 0 * T, 0 * T]), (0, 2), (0, 3))).value
    report["detail"] = f"static={static!r} collapsed={collapsed!r} reparameterized={reparam!r}"
    assert abs(static - 6.0) <= 1e-9
    assert collapsed == 0.0
    assert abs(reparam - static) / static <= 1e-8
    report["ok"] = True


def test_criterion_07_variational_equivalence(report):
    start = PathVariable.zigzag(0.0, 0.0, 10.0, 6.0, 32, amplitude=0.05)
    t0 = time.perf_counter()
    runs = {w: optimize(start, w, Particle(1.0)) for w in Objective}
    elapsed = time.perf_counter() - t0
    a, b = runs[Objective.ACTION], runs[Objective.AREA]
    gap = float(np.max(np.abs(a.path.x - b.path.x)))
    line = 0.6 * a.path.t
    dev = max(float(np.max(np.abs(r.path.x - line))) for r in runs.values())
    report["detail"] = (f"grad norms {a.gradient_norm:.1e}/{b.gradient_norm:.1e}, "
                        f"path gap {gap:.1e}, line deviation {dev:.1e}, {elapsed:.2f}s")
    assert a.converged and b.converged
    assert a.gradient_norm <= 1e-10 and b.gradient_norm <= 1e-10
    assert gap <= 1e-6
    assert dev < 1e-4 * 6
    assert elapsed < 5.0
    report["ok"] = True


def test_criterion_08_gradient(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(4, 40))
        base = PathVariable.straight(0.0, 0.0, 10.0, float(rng.uniform(-6, 6)), n)
        pv = base.with_interior(base.interior + rng.uniform(-0.1, 0.1, n - 1) * base.dt)
        h = 1e-7 * 10.0
        for which in Objective:
            g = gradient(pv, which, Particle(1.0))
            for k in range(g.size):
                up, dn = pv.interior.copy(), pv.interior.copy()
                up[k] += h
                dn[k] -= h
                fd = (discrete_objective(pv.with_interior(up), which, Particle(1.0))
                      - discrete_objective(pv.with_interior(dn), which, Particle(1.0))) / (2 * h)
                worst = max(worst, abs(g[k] - fd) / abs(g[k]))
    report["detail"] = f"max componentwise relative error {worst:.1e}"
    assert worst < 1e-5
    report["ok"] = True


def test_criterion_09_quadrature_order(report):
    battery = [
        (math.sin, 0.0, math.pi, 2.0),
        (math.exp, 0.0, 1.0, math.e - 1.0),
        (lambda t: 1.0 / t, 1.0, 10.0, math.log(10.0)),
        (lambda t: t**5 - 2 * t, -1.0, 2.0, 63 / 6 - 3.0),
        (lambda t: math.cos(3 * t) ** 2, 0.0, 2.0, 1.0 + math.sin(12.0) / 12.0),
        (lambda t: math.sqrt(1.0 - (0.5 + 0.2 * math.cos(t)) ** 2), 0.0, 10.0, 8.5595345722887067904),
    ]
    orders = []
    for f, a, b, exact in battery:
        e1 = abs(integrate_1d(f, a, b, CompositeSimpson(16)).value - exact)
        e2 = abs(integrate_1d(f, a, b, CompositeSimpson(32)).value - exact)
        orders.append(math.log2(e1 / e2))
    report["detail"] = "orders " + " ".join(f"{o:.2f}" for o in orders)
    assert all(3.5 <= o <= 4.5 for o in orders)
    report["ok"] = True


def test_criterion_10_parser(report):
    # round trip
    texts = generated(10, 50, random_text)
    for text in texts:
        e = parse(text)
        assert parse(to_string(e)) == e
        assert to_string(parse(to_string(e))) == to_string(e)
    # derivatives
    worst = 0.0
    rng = random.Random(10)
    for text in generated(20, 50, random_smooth):
        e = parse(text)
        f, df = compile_expr(e), compile_expr(differentiate(e))
        for _ in range(10):
            t = rng.uniform(-2, 2)
            h = 1e-3
            fd = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
            d = df(t)
            worst = max(worst, abs(d - fd) / max(abs(d), 1.0))
    # malformed input: mutate valid texts and feed raw garbage
    alphabet = "t+-*/^()0123456789.e sincoqrx$@!"
    bad = ["", "t +", "2t", "sin t", "(t", "t)", "t^t", "x", "3 $ 4", "1e999", "sin()", ",", "t**2"]
    for text in texts:
        k = rng.randrange(len(text) + 1)
        bad.append(text[:k] + rng.choice(alphabet) + text[k:])
        bad.append(text[:k])
    rejected = 0
    for text in bad:
        try:
            parse(text)
        except ExprError as exc:
            assert exc.position is not None and 0 <= exc.position <= len(text)
            rejected += 1
    report["detail"] = (f"{len(texts)} round trips, derivative error {worst:.1e}, "
                        f"{rejected}/{len(bad)} mutated inputs rejected with positions")
    assert worst < 1e-6
    assert rejected >= 13
    report["ok"] = True


CLI_RUNS = {
    "eval": ["eval", "--expr", "0.5*t + 0.2*sin(t)", "--t0", "0", "--t1", "10"],
    "verify": ["verify", "--expr", "a*t", "--t0", "0", "--t1", "10", "--param", "a=0.1:0.9:9"],
    "sweep": ["sweep", "--param", "v=0.1:0.9:9"],
    "optimize": ["optimize", "--t0", "0", "--t1", "10", "--x0", "0", "--x1", "6", "--nodes", "32"],
}
CLI_FAILURES = [
    (["eval", "--expr", "1.5*c*t", "--t0", "0", "--t1", "1"], 1),
    (["verify", "--expr", "a*t +", "--t0", "0", "--t1", "1", "--param", "a=0.1:0.2:2"], 1),
    (["sweep", "--param", "v=0:1:5"], 1),
    (["optimize", "--t0", "0", "--t1", "10", "--x0", "0", "--x1", "12"], 1),
    (["eval", "--expr", "0.5*t + 0.2*sin(t)", "--t0", "0", "--t1", "10", "--quad", "adaptive:1e-16,1e-16,3"], 2),
    (["verify", "--expr", "a*t", "--t0", "0", "--t1", "10", "--param", "a=0.1:0.9:3", "--threshold", "0"], 2),
    (["sweep", "--param", "v=0.1:0.9:9"], 0),
    (["optimize", "--t0", "0", "--t1", "10", "--x0", "0", "--x1", "6", "--max-iter", "2"], 2),
]


def test_criterion_11_cli_contract(report, tmp_path):
    for name, argv in CLI_RUNS.items():
        results = []
        for i in range(2):
            out = tmp_path / f"{name}{i}.csv"
            proc = subprocess.run([sys.executable, "-m", "surfaction", *argv, "--out", str(out)],
                                  capture_output=True, check=False)
            assert proc.returncode == 0, proc.stderr
            results.append((proc.stdout, out.read_bytes()))
        assert results[0] == results[1], name
    codes = []
    for argv, expected in CLI_FAILURES:
        code = main(argv)
        codes.append(code)
        assert code == expected, argv
    report["detail"] = f"4 commands byte-identical on rerun; exit codes {codes}"
    report["ok"] = True
