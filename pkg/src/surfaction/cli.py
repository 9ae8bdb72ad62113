"""Command-line front end.

Subcommands: ``eval``, ``verify``, ``sweep``, ``optimize``, ``nambu-goto``.
Data goes to stdout (or ``--out``); failures print one line
``code=<n> reason=<text>`` to stderr. Exit codes: 0 success, 1 input
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from . import trajexpr
from .errors import InputError, NumericalError, SpeedLimitError, SurfactionError
from .functionals import (
    SWEEP_COLUMNS,
    de_broglie_length,
    speed_features,
    nambu_goto_area,
    swept_area_spatial,
    verify_identity,
)
from .quadrature import DEFAULT_QUADRATURE, parse_quadrature
from .quantities import Particle, UnitSystem
from .trajectory import Trajectory, format_float, read_grid_csv, static_string, write_csv
from .variational import OptimizeSettings, PathVariable, optimize

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class CliError(Exception):
    def __init__(self, code, reason):
        super().__init__(reason)
        self.code = code
        self.reason = reason


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_INPUT, message)


def _fmt(v):
    if v is None:
        return "undefined"
    return format_float(v)


def _parse_param(text):
    m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*=\s*([^:]+):([^:]+):(\d+)\s*", text or "")
    if not m:
        raise InputError(f"bad --param {text!r}; expected name=start:stop:steps")
    name, a, b, n = m.group(1), float(m.group(2)), float(m.group(3)), int(m.group(4))
    if n < 1:
        raise InputError("--param needs at least one step")
    if n == 1:
        return name, np.array([a])
    return name, np.linspace(a, b, n)


def _masses(text):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad --mass {text!r}") from None
    if not values:
        raise InputError("--mass is empty")
    return values


def _units(args):
    return UnitSystem.from_name(args.units, h=args.h, c=args.c)


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _load_trajectory(args, u, bindings=None):
    if bool(args.expr) == bool(args.csv):
        raise InputError("give exactly one trajectory source: --expr or --csv")
    if args.expr:
        if args.t0 is None or args.t1 is None:
            raise InputError("--expr needs --t0 and --t1")
        return Trajectory.analytic(trajexpr.parse(args.expr, bindings), args.t0, args.t1, u)
    return Trajectory.from_csv(args.csv, u)


# ---------------------------------------------------------------------------

def cmd_eval(args):
    u = _units(args)
    masses = _masses(args.mass)
    if len(masses) != 1:
        raise InputError("eval takes a single --mass")
    p = Particle(masses[0])
    q = parse_quadrature(args.quad) if args.quad else DEFAULT_QUADRATURE
    tr = _load_trajectory(args, u)
    rep = verify_identity(tr, p, u, q)
    lines = [f"units={u.mode.value}", rep.to_text().rstrip("\n")]
    try:
        spatial = swept_area_spatial(tr, p, u, q, v_floor=args.v_floor)
        lines.append(f"area_A_spatial={_fmt(spatial.value)}")
        converged = rep.converged and spatial.converged
    except SurfactionError as exc:
        lines.append(f"area_A_spatial=undefined ({exc})")
        converged = rep.converged
    lines.append("")
    rows = ["t,x,v,lambda_B"]
    for t in np.linspace(tr.t_start, tr.t_end, args.samples):
        v = tr.velocity(t)
        lam = de_broglie_length(p, v, u) if v != 0 else None
        rows.append(",".join([_fmt(t), _fmt(tr.position(t)), _fmt(v), _fmt(lam)]))
    text = "\n".join(lines + rows) + "\n"
    if args.out:
        _emit("\n".join(rows) + "\n", args.out)
        text = "\n".join(lines[:-1]) + "\n"
    sys.stdout.write(text)
    if not converged:
        raise CliError(EXIT_NUMERIC, "quadrature did not converge")
    return EXIT_OK


def _family(args, u):
    """Yield (id, param, trajectory-or-error) in deterministic order."""
    if args.csv_dir:
        if args.expr or args.csv:
            raise InputError("--csv-dir excludes --expr/--csv")
        files = sorted(Path(args.csv_dir).glob("*.csv"))
        if not files:
            raise InputError(f"no CSV files in {args.csv_dir}")
        for f in files:
            try:
                yield f.stem, None, Trajectory.from_csv(f, u)
            except SpeedLimitError as exc:
                yield f.stem, None, exc
        return
    if args.param:
        name, values = _parse_param(args.param)
        if not args.expr:
            raise InputError("--param needs --expr")
        for i, a in enumerate(values):
            try:
                tr = _load_trajectory(args, u, {name: a})
            except SpeedLimitError as exc:
                tr = exc
            yield f"{name}{i}", float(a), tr
        return
    yield "traj0", None, _load_trajectory(args, u)


def cmd_verify(args):
    u = _units(args)
    masses = _masses(args.mass)
    q = parse_quadrature(args.quad) if args.quad else DEFAULT_QUADRATURE
    header = "id,param,mass,S,A,k,kA,residual,status"
    rows = [header]
    worst, n_ok, n_flag, converged = 0.0, 0, 0, True
    for ident, param, tr in _family(args, u):
        for m in masses:
            p = Particle(m)
            pcol = "" if param is None else _fmt(param)
            if isinstance(tr, SpeedLimitError):
                status = "A=0: residual undefined" if tr.lightlike else "speed limit violated"
                rows.append(f"{ident},{pcol},{_fmt(m)},,,,,undefined,{status}")
                n_flag += 1
                continue
            rep = verify_identity(tr, p, u, q)
            converged &= rep.converged
            if rep.identity_residual is None:
                rows.append(f"{ident},{pcol},{_fmt(m)},{_fmt(rep.action_S)},{_fmt(rep.area_A)},"
                            f"{_fmt(rep.constant_k)},{_fmt(rep.kA)},undefined,A=0: residual undefined")
                n_flag += 1
                continue
            worst = max(worst, rep.identity_residual)
            n_ok += 1
            rows.append(f"{ident},{pcol},{_fmt(m)},{_fmt(rep.action_S)},{_fmt(rep.area_A)},"
                        f"{_fmt(rep.constant_k)},{_fmt(rep.kA)},{_fmt(rep.identity_residual)},ok")
    summary = f"# max_residual={_fmt(worst if n_ok else None)} rows={n_ok} flagged={n_flag} threshold={_fmt(args.threshold)}"
    body = "\n".join(rows) + "\n"
    if args.out:
        _emit(body, args.out)
        sys.stdout.write(summary + "\n")
    else:
        sys.stdout.write(body + summary + "\n")
    if n_ok == 0:
        raise CliError(EXIT_INPUT, "no family member has a defined residual")
    if not converged:
        raise CliError(EXIT_NUMERIC, "quadrature did not converge")
    if not worst < args.threshold:
        raise CliError(EXIT_NUMERIC, f"max residual {_fmt(worst)} exceeds threshold {_fmt(args.threshold)}")
    return EXIT_OK


def cmd_sweep(args):
    u = _units(args)
    masses = _masses(args.mass)
    if len(masses) != 1:
        raise InputError("sweep takes a single --mass")
    name, v = _parse_param(args.param or "v=0.1:0.9:9")
    if name != "v":
        raise InputError("sweep parameter must be named v")
    if np.any(v <= 0) or np.any(v >= u.c):
        raise InputError("sweep range must lie inside (0, c)")
    p = Particle(masses[0])
    feats = [speed_features(float(vi), p, u) for vi in v]
    rows = [",".join(SWEEP_COLUMNS)]
    rows += [",".join(_fmt(x) for x in (vi, *fi)) for vi, fi in zip(v, feats)]
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def cmd_optimize(args):
    u = _units(args)
    masses = _masses(args.mass)
    if len(masses) != 1:
        raise InputError("optimize takes a single --mass")
    p = Particle(masses[0])
    for flag in ("t0", "t1", "x0", "x1"):
        if getattr(args, flag) is None:
            raise InputError(f"optimize needs --{flag}")
    n = args.nodes
    v_max = args.v_max * u.c
    if not args.t0 < args.t1:
        raise InputError("optimize needs t0 < t1")
    slope = (args.x1 - args.x0) / (args.t1 - args.t0)
    if abs(slope) >= v_max:
        raise InputError(f"infeasible endpoints: |dx/dt| = {abs(slope)!r} >= v_max = {v_max!r}")
    dt = (args.t1 - args.t0) / n
    amp = args.zigzag if args.zigzag is not None else 0.2 * dt * (v_max - abs(slope))
    pv = PathVariable.zigzag(args.t0, args.x0, args.t1, args.x1, n, amp, v_max, u)
    settings = OptimizeSettings(grad_tol=args.grad_tol, max_iter=args.max_iter)
    res = optimize(pv, args.objective, p, u, settings)
    report = "\n".join([
        f"objective={args.objective}",
        f"value={_fmt(res.objective)}",
        f"iterations={res.iterations}",
        f"gradient_norm={_fmt(res.gradient_norm)}",
        f"converged={str(res.converged).lower()}",
        f"max_deviation_from_line={_fmt(np.max(np.abs(res.path.x - (args.x0 + slope * (res.path.t - args.t0)))))}",
    ]) + "\n"
    csv_text = write_csv(None, res.path.t, res.path.x)
    if args.out:
        _emit(csv_text, args.out)
        sys.stdout.write(report)
    else:
        sys.stdout.write(report + "\n" + csv_text)
    if not res.converged:
        raise CliError(EXIT_NUMERIC, "optimizer did not converge within the iteration budget")
    return EXIT_OK


def cmd_nambu_goto(args):
    q = parse_quadrature(args.quad) if args.quad else DEFAULT_QUADRATURE
    if bool(args.preset) == bool(args.grid):
        raise InputError("give exactly one worldsheet source: --preset or --grid")
    if args.preset:
        if args.preset != "static-string":
            raise InputError(f"unknown preset {args.preset!r}")
        u = _units(args)
        ws = static_string(args.length, args.duration, c=u.c)
    else:
        ws = read_grid_csv(args.grid)
    res = nambu_goto_area(ws, q)
    lines = [f"area={_fmt(res.value)}", f"abs_error_estimate={_fmt(res.abs_error_estimate)}",
             f"evaluations={res.evaluations}", f"converged={str(res.converged).lower()}"]
    if args.tension is not None:
        if not args.tension > 0:
            raise InputError("--tension must be positive")
        lines.append(f"action={_fmt(args.tension * res.value)}")
    _emit("\n".join(lines) + "\n", args.out)
    if not res.converged:
        raise CliError(EXIT_NUMERIC, "quadrature did not converge")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="surfaction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, trajectory=True):
        sp.add_argument("--units", choices=["si", "natural"], default="natural")
        sp.add_argument("--h", type=float, default=None, help="Planck constant override (SI)")
        sp.add_argument("--c", type=float, default=None, help="speed of light override (SI)")
        sp.add_argument("--mass", default="1", help="rest mass (comma list for verify)")
        sp.add_argument("--quad", default=None, help="simpson:N or adaptive:ABS,REL[,DEPTH]")
        sp.add_argument("--out", default=None, help="write data to this file")
        if trajectory:
            sp.add_argument("--expr", default=None)
            sp.add_argument("--csv", default=None)
            sp.add_argument("--t0", type=float, default=None)
            sp.add_argument("--t1", type=float, default=None)

    sp = sub.add_parser("eval", help="evaluate S, A, L, k and Lambda_B on one trajectory")
    common(sp)
    sp.add_argument("--samples", type=int, default=11)
    sp.add_argument("--v-floor", type=float, default=None)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("verify", help="check |S| = k A across a trajectory family")
    common(sp)
    sp.add_argument("--param", default=None, help="name=start:stop:steps")
    sp.add_argument("--csv-dir", default=None)
    sp.add_argument("--threshold", type=float, default=1e-6)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="tabulate Lambda_B, gamma and rates against v")
    common(sp, trajectory=False)
    sp.add_argument("--param", default=None, help="v=start:stop:steps")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("optimize", help="extremize the discrete action or area")
    common(sp, trajectory=False)
    sp.add_argument("--t0", type=float, default=None)
    sp.add_argument("--t1", type=float, default=None)
    sp.add_argument("--x0", type=float, default=None)
    sp.add_argument("--x1", type=float, default=None)
    sp.add_argument("--nodes", type=int, default=32, help="number of time intervals N")
    sp.add_argument("--objective", choices=["action", "area"], default="action")
    sp.add_argument("--zigzag", type=float, default=None, help="initial zig-zag amplitude")
    sp.add_argument("--v-max", type=float, default=0.99, help="speed bound as a fraction of c")
    sp.add_argument("--grad-tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("nambu-goto", help="Nambu-Goto area of a worldsheet")
    common(sp, trajectory=False)
    sp.add_argument("--preset", default=None, help="static-string")
    sp.add_argument("--length", type=float, default=1.0)
    sp.add_argument("--duration", type=float, default=1.0)
    sp.add_argument("--grid", default=None, help="CSV with tau,sigma,X0,X1,X2,X3")
    sp.add_argument("--tension", type=float, default=None)
    sp.set_defaults(func=cmd_nambu_goto)
    return parser


def _oneline(text):
    return " ".join(str(text).split())


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise CliError(EXIT_INPUT, "missing command")
        return args.func(args)
    except CliError as exc:
        code, reason = exc.code, exc.reason
    except (InputError, OSError) as exc:
        code, reason = EXIT_INPUT, str(exc)
    except (NumericalError, ArithmeticError) as exc:
        code, reason = EXIT_NUMERIC, str(exc)
    sys.stderr.write(f"code={code} reason={_oneline(reason)}\n")
    return code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
