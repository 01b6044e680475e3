"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 solver inconclusive (or a failed
verification for ``verify``).
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
from pydantic import ValidationError

from . import __version__
from .classify import Case2OneDimensional, Case3BangBang, Continuous, ZeroTime, classify, solve_case1, solve_case2_1d
from .errors import MinTimeError, NoSolutionFound
from .io import ProblemFile, SolutionFile, dump_json, load_problem, load_solution
from .normalize import BoundaryConditions, normalize
from .oracle import verify_solution
from .search import SearchConfig, solve
from .tausolve import lambda_max

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2
BATCH_FIELDS = ("u1", "v1", "u2", "v2", "dx", "dy")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _config(args) -> SearchConfig:
    cfg = SearchConfig()
    if getattr(args, "theta_grid", None) is not None:
        cfg = replace(cfg, theta_grid=args.theta_grid)
    if getattr(args, "alpha_grid", None) is not None:
        cfg = replace(cfg, alpha_grid=args.alpha_grid)
    if getattr(args, "tol", None) is not None:
        cfg = replace(cfg, class_tol=args.tol)
    return cfg


def _read_problem(path: str) -> ProblemFile | None:
    try:
        return load_problem(path)
    except (OSError, ValidationError, ValueError) as exc:
        _err(f"cannot read problem {path}: {exc}")
        return None


def cmd_solve(args) -> int:
    prob = _read_problem(args.input)
    if prob is None:
        return EXIT_INPUT
    try:
        cfg = _config(args)
        bc = prob.to_boundary_conditions()
    except (ValueError, MinTimeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    try:
        sol = solve(bc, cfg)
    except NoSolutionFound as exc:
        _err(f"no solution: {exc}")
        _err("hint: the instance may lie near a bang-bang case (try a larger --tol) or need a finer grid")
        d = exc.diagnostics
        if d is not None:
            _err(
                json.dumps(
                    {
                        "grid_cells_scanned": d.grid_cells_scanned,
                        "newton_iterations_total": d.newton_iterations_total,
                        "refined": d.refined,
                    }
                )
            )
        return EXIT_SOLVER
    _write(dump_json(SolutionFile.from_solution(sol, prob.id)), args.output)
    return EXIT_OK


def _classify_report(bc: BoundaryConditions, tol: float) -> dict:
    k = bc.accel_bound
    r = bc.rescaled()
    try:
        np_, rec = normalize(bc, tol)
    except MinTimeError:
        case = classify(BoundaryConditions(r.u1, r.v1, r.u1, r.v1, r.dx, r.dy), tol)
        if isinstance(case, ZeroTime):
            return {"case": case.name, "parameters": {"T": 0.0}}
        T = solve_case1((r.u1, r.v1), (r.dx, r.dy)).duration
        return {"case": case.name, "parameters": {"T": T, "switch_time": T / 2.0}}
    case = classify(np_, tol)
    b = rec.beta
    if isinstance(case, Case3BangBang):
        return {"case": case.name, "parameters": {"order": case.order, "T1": case.T1 * b, "T2": case.T2 * b}}
    if isinstance(case, Case2OneDimensional):
        chain = solve_case2_1d(np_.u, np_.u + 1.0, np_.dx, tol)
        durations = [s.duration * b for s in chain.segments]
        return {"case": case.name, "parameters": {"durations": durations, "T": sum(durations)}}
    assert isinstance(case, Continuous)
    params = {"near_bang_bang": case.near_case3 is not None, "accel_bound": k}
    return {"case": case.name, "parameters": params}


def cmd_classify(args) -> int:
    prob = _read_problem(args.input)
    if prob is None:
        return EXIT_INPUT
    try:
        report = _classify_report(prob.to_boundary_conditions(), args.tol)
    except (ValueError, MinTimeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    _write(json.dumps(report, indent=2) + "\n", None)
    return EXIT_OK


def _read_solution(path: str) -> SolutionFile | None:
    try:
        return load_solution(path)
    except (OSError, ValidationError, ValueError) as exc:
        _err(f"cannot read solution {path}: {exc}")
        return None


def cmd_verify(args) -> int:
    prob = _read_problem(args.problem)
    solf = _read_solution(args.solution)
    if prob is None or solf is None:
        return EXIT_INPUT
    try:
        traj = solf.trajectory()
        bc = prob.to_boundary_conditions()
    except (ValueError, MinTimeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    report = verify_solution(bc, SimpleNamespace(trajectory=traj, total_time=solf.total_time))
    _write(json.dumps(report.as_dict(), indent=2) + "\n", None)
    return EXIT_OK if report.passed else EXIT_SOLVER


def sample_times(T: float, dt: float | None = None, count: int | None = None) -> np.ndarray:
    """Uniform sample times covering [0, T], both ends included."""
    if count is not None:
        if count < 1:
            raise ValueError("count must be at least 1")
        return np.linspace(0.0, T, count) if count > 1 else np.array([0.0])
    if not (dt is not None and dt > 0):
        raise ValueError("dt must be positive")
    n = int(math.floor(T / dt + 1e-9))
    t = np.arange(n + 1) * dt
    if T - t[-1] > 1e-12 * max(1.0, T):
        t = np.append(t, T)
    return t


def cmd_sample(args) -> int:
    solf = _read_solution(args.solution)
    if solf is None:
        return EXIT_INPUT
    try:
        traj = solf.trajectory()
        t = sample_times(solf.total_time, args.dt, args.count)
    except (ValueError, MinTimeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    p, v, a = traj.states(t)
    p = p - p[:1]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "vx", "vy", "ax", "ay"])
    for row in np.column_stack([t, p, v, a]):
        # + 0.0 turns -0.0 into 0.0
        w.writerow([repr(float(x) + 0.0) for x in row])
    _write(buf.getvalue(), None)
    return EXIT_OK


def _batch_row(row: dict, cfg: SearchConfig) -> tuple[str, str, str]:
    try:
        data = {k: row.get(k) for k in BATCH_FIELDS}
        if row.get("accel_bound") not in (None, ""):
            data["accel_bound"] = row["accel_bound"]
        prob = ProblemFile.model_validate(data)
        bc = prob.to_boundary_conditions()
    except (ValidationError, ValueError, MinTimeError):
        return "", "", "parse_error"
    try:
        sol = solve(bc, cfg)
    except NoSolutionFound:
        return "", "", "no_solution"
    except MinTimeError:
        return "", "", "solver_error"
    return sol.kind, repr(float(sol.total_time)), "ok"


def cmd_batch(args) -> int:
    cfg = _config(args)
    try:
        with open(args.input, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        _err(f"cannot read {args.input}: {exc}")
        return EXIT_INPUT
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "kind", "total_time", "status"])
    for i, row in enumerate(rows):
        rid = (row.get("id") or "").strip() or str(i)
        w.writerow([rid, *_batch_row(row, cfg)])
    try:
        _write(buf.getvalue(), args.output)
    except OSError as exc:
        _err(f"cannot write {args.output}: {exc}")
        return EXIT_INPUT
    return EXIT_OK


def lambda_table(T: float, steps: int) -> list[tuple[float, float]]:
    """Lambda(T, theta) at ``steps`` interior angles theta_k = -pi/2 + (k + 1) pi / (steps + 1)."""
    thetas = -math.pi / 2 + (np.arange(steps) + 1) * math.pi / (steps + 1)
    return [(float(th), lambda_max(T, float(th))) for th in thetas]


def cmd_lambda(args) -> int:
    try:
        if args.steps < 1:
            raise ValueError("steps must be at least 1")
        rows = lambda_table(args.T, args.steps)
    except (ValueError, MinTimeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "lambda"])
    for th, lam in rows:
        w.writerow([repr(th), repr(lam)])
    _write(buf.getvalue(), None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planar-mintime", description="Minimum-time planar trajectories under a bounded acceleration.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one problem file")
    s.add_argument("--input", required=True)
    s.add_argument("--output")
    s.add_argument("--theta-grid", type=int)
    s.add_argument("--alpha-grid", type=int)
    s.add_argument("--tol", type=float, help="relative classification tolerance")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", help="report the solution family of a problem")
    c.add_argument("--input", required=True)
    c.add_argument("--tol", type=float, default=SearchConfig().class_tol)
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", help="check a solution file against its problem")
    v.add_argument("--problem", required=True)
    v.add_argument("--solution", required=True)
    v.set_defaults(func=cmd_verify)

    sm = sub.add_parser("sample", help="tabulate a solution as CSV")
    sm.add_argument("--solution", required=True)
    g = sm.add_mutually_exclusive_group(required=True)
    g.add_argument("--dt", type=float)
    g.add_argument("--count", type=int)
    sm.set_defaults(func=cmd_sample)

    b = sub.add_parser("batch", help="solve every row of a CSV")
    b.add_argument("--input", required=True)
    b.add_argument("--output", required=True)
    b.add_argument("--theta-grid", type=int)
    b.add_argument("--alpha-grid", type=int)
    b.add_argument("--tol", type=float)
    b.set_defaults(func=cmd_batch)

    lam = sub.add_parser("lambda", help="table of the dilation ceiling over theta")
    lam.add_argument("--T", type=float, required=True)
    lam.add_argument("--steps", type=int, required=True)
    lam.set_defaults(func=cmd_lambda)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
