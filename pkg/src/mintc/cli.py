"""File-driven command line front end.

Subcommands: canon (canonical form of the boundary matrix), times
(travel times and control times), simulate (forward/dual trajectories),
gramian (observability-defect sweeps), witness (non-observability
data).  All numeric output is CSV, deterministic byte-for-byte for
identical inputs; an optional version header is off by default.

Exit codes: 0 success, 2 parse/validation error, 3 refusal or no
witness, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .canon import RankDeficiencyError, canonical_ul_decompose, rank
from .mintime import minimal_time
from .specfile import ParsedSpec, SpecFileError, load_spec
from .speeds import ValidationError, travel_times
from .sim.errors import (
    GridRefusalError,
    NoWitnessError,
    NumericsError,
    SizeRefusalError,
)
from .sim.gramian import observability_defect
from .sim.problem import ProblemSpec
from .sim.solver import default_nt, grid_norm, solve_adjoint, solve_forward
from .sim.witness import build_witness_rank_deficient, build_witness_subcritical

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_REFUSAL = 3
EXIT_NUMERIC = 4


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if v == math.inf:
        return "inf"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _open_out(path, flags):
    fh = open(path, "w", newline="", encoding="utf-8")
    if flags.version_header:
        fh.write(f"# mintc {__version__}\n")
    return fh


def _load(path: str) -> ParsedSpec:
    return load_spec(path)


def _matrix_lines(mat) -> list[str]:
    return ["  ".join(_fmt(v) for v in row) for row in mat]


def cmd_canon(args) -> int:
    parsed = _load(args.file)
    q = parsed.problem.q
    r = rank(q)
    if r < q.p:
        print(f"rank Q = {r} < {q.p}; T_opt = +inf")
        return EXIT_OK
    dec = canonical_ul_decompose(q)
    print("canonical form Q0:")
    for line in _matrix_lines(dec.q0):
        print("  " + line)
    print("unit lower-triangular L:")
    for line in _matrix_lines(dec.l):
        print("  " + line)
    print("column indices c:", ", ".join(str(c) for c in dec.c))
    from . import ratmat

    ok = ratmat.matmul(q.entries, dec.l) == dec.q0
    print("verified Q L = Q0:", "yes" if ok else "NO")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_times(args) -> int:
    parsed = _load(args.file)
    report = minimal_time(parsed.problem.profile, parsed.problem.q)
    print(report.as_kv_block())
    if args.csv:
        header, row = report.as_csv_row()
        print(header)
        print(row)
    return EXIT_OK


def _read_state_csv(path, n, x_grid):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        if len(header) != n + 1 or header[0] != "x":
            raise SpecFileError(
                f"state CSV must have columns x,comp_1,...,comp_{n}"
            )
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    if data.shape[0] < 2:
        raise SpecFileError("state CSV needs at least two rows")
    xs = data[:, 0]
    return np.stack(
        [np.interp(x_grid, xs, data[:, 1 + i]) for i in range(n)]
    )


def _read_control_csv(path, m, t_grid):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        if len(header) != m + 1 or header[0] != "t":
            raise SpecFileError(
                f"control CSV must have columns t,u_1,...,u_{m}"
            )
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    return np.stack(
        [np.interp(t_grid, data[:, 0], data[:, 1 + j]) for j in range(m)], axis=1
    )


def cmd_simulate(args) -> int:
    parsed = _load(args.file)
    spec = parsed.problem
    horizon = args.t if args.t is not None else parsed.horizon
    if horizon is None:
        raise SpecFileError("no horizon: set [horizon] t or pass --t")
    nx = args.nx or parsed.nx or 257
    nt = args.nt or parsed.nt or default_nt(horizon, nx)
    x = np.linspace(0.0, 1.0, nx)
    t = np.linspace(0.0, horizon, nt)
    data = (
        _read_state_csv(args.data, spec.n, x) if args.data else None
    )
    if args.mode == "forward":
        control = (
            _read_control_csv(args.control, spec.m, t) if args.control else None
        )
        traj = solve_forward(spec, data, horizon, control=control, nx=nx, nt=nt)
    else:
        if args.control:
            raise SpecFileError("--control only applies to forward mode")
        traj = solve_adjoint(spec, data, horizon, nx=nx, nt=nt)
    if args.out:
        with _open_out(args.out, args) as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "component", "value"])
            for j in range(traj.nt):
                for i in range(spec.n):
                    for k in range(traj.nx):
                        writer.writerow(
                            [
                                _fmt(float(traj.t[j])),
                                _fmt(float(traj.x[k])),
                                i + 1,
                                _fmt(float(traj.values[j, i, k])),
                            ]
                        )
    if args.trace_out:
        with _open_out(args.trace_out, args) as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "side", "component", "value"])
            for j in range(traj.nt):
                for i in range(spec.n):
                    writer.writerow(
                        [
                            _fmt(float(traj.t[j])),
                            "left",
                            i + 1,
                            _fmt(float(traj.values[j, i, 0])),
                        ]
                    )
                for i in range(spec.n):
                    writer.writerow(
                        [
                            _fmt(float(traj.t[j])),
                            "right",
                            i + 1,
                            _fmt(float(traj.values[j, i, -1])),
                        ]
                    )
    print(
        f"simulated {args.mode} trajectory: nt={traj.nt} nx={traj.nx} "
        f"horizon={_fmt(horizon)}"
    )
    return EXIT_OK


def cmd_gramian(args) -> int:
    parsed = _load(args.file)
    spec = parsed.problem
    if args.steps < 1 or args.tmax < args.tmin or args.tmin <= 0:
        raise SpecFileError("need 0 < tmin <= tmax and steps >= 1")
    nx = args.nx or parsed.nx or 129
    ts = np.linspace(args.tmin, args.tmax, args.steps)
    reports = [observability_defect(spec, float(tv), nx=nx) for tv in ts]
    with _open_out(args.out, args) as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "defect", "sigma_min", "sigma_max", "n_basis"])
        for rep in reports:
            writer.writerow(
                [
                    _fmt(rep.t),
                    _fmt(rep.defect),
                    _fmt(float(rep.singular_values[-1])),
                    _fmt(float(rep.singular_values[0])),
                    rep.n_basis,
                ]
            )
    if args.singular_out:
        with _open_out(args.singular_out, args) as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "index", "sigma"])
            for rep in reports:
                for idx, sv in enumerate(rep.singular_values):
                    writer.writerow([_fmt(rep.t), idx, _fmt(float(sv))])
    print(f"gramian sweep written to {args.out} ({args.steps} horizons)")
    return EXIT_OK


def cmd_witness(args) -> int:
    parsed = _load(args.file)
    spec = parsed.problem
    horizon = args.t if args.t is not None else parsed.horizon
    if horizon is None:
        raise SpecFileError("no horizon: set [horizon] t or pass --t")
    if rank(spec.q) < spec.p:
        witness = build_witness_rank_deficient(spec)
    else:
        witness = build_witness_subcritical(spec, horizon)
    nx = args.nx or parsed.nx or 513
    z1 = witness.sample(nx)
    with _open_out(args.out, args) as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "component", "value"])
        x = np.linspace(0.0, 1.0, nx)
        for i in range(spec.n):
            for k in range(nx):
                writer.writerow([_fmt(float(x[k])), i + 1, _fmt(float(z1[i, k]))])
    # residual report: dual solve under the slope coupling, for which the
    # construction is exact
    from .sim.problem import slope_coupling

    sim_spec = ProblemSpec(
        profile=spec.profile, q=spec.q, coupling=slope_coupling(spec.profile)
    )
    traj = solve_adjoint(sim_spec, z1, horizon, nx=nx)
    lam = np.array(
        [float(spec.profile.values[i][-1]) for i in range(spec.p, spec.n)]
    )
    trace = lam * traj.values[:, spec.p :, -1]
    resid = float(np.sqrt(np.trapezoid((trace**2).sum(axis=1), dx=traj.dt)))
    dx = 1.0 / (nx - 1)
    print(f"witness kind: {witness.kind}")
    print(f"|z1| = {_fmt(grid_norm(z1, dx))}")
    print(f"trace residual = {_fmt(resid)}")
    print(f"|z(0)| = {_fmt(grid_norm(traj.values[0], dx))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mintc",
        description="minimal control time of 1-D hyperbolic systems "
        "with one-sided boundary controls",
    )
    parser.add_argument(
        "--version", action="version", version=f"mintc {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("file", help="problem description file")
        p.add_argument(
            "--version-header",
            action="store_true",
            help="prepend `# mintc <version>` to CSV outputs",
        )

    p = sub.add_parser("canon", help="canonical form of the boundary matrix")
    add_common(p)
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("times", help="travel and minimal control times")
    add_common(p)
    p.add_argument("--csv", action="store_true", help="append a CSV row")
    p.set_defaults(func=cmd_times)

    p = sub.add_parser("simulate", help="run a forward or dual solve")
    add_common(p)
    p.add_argument("--mode", choices=("forward", "adjoint"), required=True)
    p.add_argument("--data", help="initial (forward) or final (adjoint) state CSV")
    p.add_argument("--control", help="control samples CSV (forward only)")
    p.add_argument("--out", help="trajectory CSV output")
    p.add_argument("--trace-out", help="boundary trace CSV output")
    p.add_argument("--t", type=float, help="horizon override")
    p.add_argument("--nx", type=int)
    p.add_argument("--nt", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gramian", help="observability defect sweep")
    add_common(p)
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--singular-out", help="full singular spectra CSV")
    p.add_argument("--nx", type=int)
    p.set_defaults(func=cmd_gramian)

    p = sub.add_parser("witness", help="non-observability witness data")
    add_common(p)
    p.add_argument("--t", type=float, help="horizon (default from file)")
    p.add_argument("--out", required=True)
    p.add_argument("--nx", type=int)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecFileError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NoWitnessError, GridRefusalError, SizeRefusalError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except (NumericsError, RankDeficiencyError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
