"""Command-line front end: ``python -m exactqcqp VERB ...``.

Exit codes:
  0  success
  1  extraction failed after an optimal solve
  2  usage, parse or parameter error
  3  I/O error
  4  relaxation unbounded
  5  relaxation infeasible
  6  iteration limit reached
  7  table1 mismatch, or a requested verify check failed
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import fileio, instances
from .constraints import ConstraintSet
from .extract import ExtractionError, extract
from .render import RenderSpec, render_svg
from .sdp import INFEASIBLE, MAX_ITER, OPTIMAL, UNBOUNDED, SolverOptions, active_set, solve_relaxation
from .table1 import format_table1, run_table1
from .verify import (
    falsify_condition_Bprime,
    verify_condition_Cprime,
    verify_condition_D,
    verify_condition_Dprime,
)

EXIT_OK = 0
EXIT_EXTRACT = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_UNBOUNDED = 4
EXIT_INFEASIBLE = 5
EXIT_MAX_ITER = 6
EXIT_MISMATCH = 7

STATUS_EXIT = {OPTIMAL: EXIT_OK, UNBOUNDED: EXIT_UNBOUNDED, INFEASIBLE: EXIT_INFEASIBLE, MAX_ITER: EXIT_MAX_ITER}

FAMILIES = (
    "disk-ring",
    "hyperbola-fan",
    "parabola-star",
    "hyperbola-family",
    "parabola-family",
    "balls",
    "strip",
    "strip-single",
    "convex-combine",
    "lift",
    "linear-eq",
    "example41",
)

GLOBAL_DEFAULTS = {"json": False, "tol": 1e-8, "seed": 0, "max_iter": 200, "unbounded_threshold": 1e8}


class UsageError(Exception):
    pass


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    g.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="solver tolerance (default 1e-8)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="sampling seed for the falsifier (default 0)")
    g.add_argument("--max-iter", type=int, default=argparse.SUPPRESS, help="solver iteration cap (default 200)")
    g.add_argument(
        "--unbounded-threshold", type=float, default=argparse.SUPPRESS, help="objective magnitude treated as -inf"
    )
    return p


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="exactqcqp",
        description="Exact SDP relaxations of QCQPs: generate, solve, verify, render, table1.",
        epilog=__doc__.split("\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    gen = sub.add_parser("generate", parents=[common], help="write an instance file from a generator")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--out", "-o", default="-", help="output path ('-' for stdout)")
    gen.add_argument("--r", type=float, help="radius / offset parameter")
    gen.add_argument("--m", type=int, help="member count")
    gen.add_argument("--p", type=float, nargs=2, help="centre for hyperbola-fan")
    gen.add_argument("--G", type=_json_arg, help="JSON list of (slope, r) or (centre, rho) pairs")
    gen.add_argument("--a", help="first input instance file (convex-combine, lift)")
    gen.add_argument("--b", help="second input instance file (convex-combine, lift)")
    gen.add_argument("--lam", type=float, default=0.5, help="mixing weight in (0, 1)")
    gen.add_argument("--L", type=_json_arg, help="explicit lift matrix as a JSON list of rows")
    gen.add_argument("--mode", choices=("split", "combine"), default="split", help="built-in lift matrix")
    gen.add_argument("--A", type=_json_arg, help="linear-eq: JSON matrix, one row per equation")
    gen.add_argument("--rhs", type=_json_arg, help="linear-eq: JSON right-hand side")
    gen.add_argument("--base", help="linear-eq: append to the constraints of this instance file")

    sol = sub.add_parser("solve", parents=[common], help="solve the relaxation and extract a rank-1 point")
    sol.add_argument("input")
    src = sol.add_mutually_exclusive_group()
    src.add_argument("--objective", help="name of an objective stored in the file")
    src.add_argument("--Q", type=_json_arg, help="objective as JSON (full matrix or lower triangle)")
    src.add_argument("--Q-file", help="read the objective from another instance file's Q")

    ver = sub.add_parser("verify", parents=[common], help="check the pairwise conditions")
    ver.add_argument("input")
    ver.add_argument(
        "--condition",
        action="append",
        choices=("D", "Dprime", "Cprime", "Bprime"),
        help="repeatable; default runs all four",
    )
    ver.add_argument("--samples", type=int, default=100_000)
    ver.add_argument("--bbox", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))

    ren = sub.add_parser("render", parents=[common], help="draw restricted zones of a 2-D family as SVG")
    ren.add_argument("input")
    ren.add_argument("--out", "-o", required=True)
    ren.add_argument("--bbox", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"), default=(-2.0, 2.0, -2.0, 2.0))
    ren.add_argument("--resolution", type=int, default=400)

    sub.add_parser("table1", parents=[common], help="reproduce the six-objective example table")
    return parser


def _options(args) -> SolverOptions:
    return SolverOptions(tol=args.tol, max_iter=args.max_iter, unbounded_threshold=args.unbounded_threshold)


def _emit(args, payload: dict, text: str, out) -> None:
    if args.json:
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _read_instance(path: str) -> fileio.InstanceFile:
    return fileio.load(path)


def _write_text(path: str, text: str, out) -> None:
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)


def _parse_matrix(obj, n: int) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2:
        if arr.shape != (n, n):
            raise UsageError(f"objective must be {n}x{n}")
        return arr
    if arr.ndim == 1:
        return fileio.from_lower(arr.tolist(), n)
    raise UsageError("objective must be a matrix or a lower triangle")


# generate ------------------------------------------------------------------


def _need(value, flag: str, family: str):
    if value is None:
        raise UsageError(f"{family} needs {flag}")
    return value


def _generate(args) -> fileio.InstanceFile:
    fam = args.family
    if fam == "disk-ring":
        return fileio.InstanceFile.from_set(instances.instance_disk_ring(0.5 if args.r is None else args.r))
    if fam == "hyperbola-fan":
        kw = {k: v for k, v in (("m", args.m), ("r", args.r), ("p", args.p)) if v is not None}
        return fileio.InstanceFile.from_set(instances.instance_hyperbola_fan(**kw))
    if fam == "parabola-star":
        kw = {k: v for k, v in (("m", args.m), ("r", args.r)) if v is not None}
        return fileio.InstanceFile.from_set(instances.instance_parabola_star(**kw))
    if fam == "hyperbola-family":
        return fileio.InstanceFile.from_set(instances.family_hyperbola(_need(args.G, "--G", fam)))
    if fam == "parabola-family":
        return fileio.InstanceFile.from_set(instances.family_parabola(_need(args.G, "--G", fam)))
    if fam == "balls":
        cset = instances.family_balls(_need(args.G, "--G", fam))
        return fileio.InstanceFile.from_set(cset)
    if fam == "strip":
        return fileio.InstanceFile.from_set(instances.instance_strip(), Q=instances.strip_objective())
    if fam == "strip-single":
        return fileio.InstanceFile.from_set(instances.instance_strip_single(), Q=instances.strip_objective())
    if fam == "example41":
        cset, objs = instances.example41()
        return fileio.InstanceFile.from_set(cset, objectives=objs)
    if fam == "convex-combine":
        a = _read_instance(_need(args.a, "--a", fam)).constraints
        b = _read_instance(_need(args.b, "--b", fam)).constraints
        return fileio.InstanceFile.from_set(instances.convex_combine(a, b, args.lam))
    if fam == "lift":
        a = _read_instance(_need(args.a, "--a", fam)).constraints
        b = _read_instance(_need(args.b, "--b", fam)).constraints
        if args.L is not None:
            L = np.asarray(args.L, dtype=float)
        elif args.mode == "combine":
            if a.n != b.n:
                raise UsageError("combine mode needs inputs of equal size")
            L = instances.combination_matrix(args.lam, a.n)
        else:
            L = instances.splitting_matrix(args.lam, a.n, b.n)
        return fileio.InstanceFile.from_set(instances.lift(a, b, L))
    if fam == "linear-eq":
        A = np.atleast_2d(np.asarray(_need(args.A, "--A", fam), dtype=float))
        rhs = _need(args.rhs, "--rhs", fam)
        con = instances.linear_equality(A, rhs)
        if args.base:
            base = _read_instance(args.base)
            cset = ConstraintSet(base.constraints.constraints + (con,), None, dict(base.constraints.metadata))
            return fileio.InstanceFile.from_set(cset, Q=base.Q, H=base.H, objectives=base.objectives)
        cset = ConstraintSet((con,), (1.0,), {"generator": "linear-eq"})
        return fileio.InstanceFile.from_set(cset)
    raise UsageError(f"unknown family {fam}")


def cmd_generate(args, out) -> int:
    doc = _generate(args)
    d = verify_condition_D(doc.constraints)
    c = verify_condition_Cprime(doc.constraints)
    _write_text(args.out, fileio.dumps(doc), out)
    echo = sys.stderr if args.out == "-" else out
    _emit(
        args,
        {"out": args.out, "constraints": len(doc.constraints), "n": doc.n, "D": d.to_dict(), "Cprime": c.to_dict()},
        f"wrote {len(doc.constraints)} constraints (n={doc.n}) to {args.out}\n{d.summary()}\n{c.summary()}",
        echo,
    )
    return EXIT_OK


# solve ---------------------------------------------------------------------


def solve_report(inst, sol) -> dict:
    report = {
        "status": sol.status,
        "eta": sol.objective,
        "dual_objective": sol.t,
        "iterations": sol.iterations,
        "residuals": sol.residuals.as_dict(),
        "active_set": active_set(inst, sol.X) if sol.status == OPTIMAL else [],
        "extraction": None,
    }
    if sol.status == OPTIMAL:
        try:
            res = extract(inst, sol)
        except ExtractionError as exc:
            report["extraction"] = {"error": str(exc)}
        else:
            report["extraction"] = {
                "case_path": res.case_path,
                "u": None if res.u is None else [float(v) for v in res.u],
                "tau": res.tau,
                "objective": res.objective,
                "split_count": res.split_count,
                "X_tilde": fileio.to_lower(res.X_tilde),
            }
    return report


def _solve_text(rep: dict) -> str:
    lines = [
        f"status      {rep['status']}",
        f"eta         {rep['eta']:.10g}",
        f"dual        {rep['dual_objective']:.10g}",
        f"iterations  {rep['iterations']}",
        "residuals   " + ", ".join(f"{k}={v:.2e}" for k, v in rep["residuals"].items()),
        f"active set  {rep['active_set']}",
    ]
    ex = rep["extraction"]
    if ex is None:
        lines.append("extraction  skipped")
    elif "error" in ex:
        lines.append(f"extraction  FAILED: {ex['error']}")
    else:
        u = "n/a" if ex["u"] is None else "(" + ", ".join(f"{v:.8g}" for v in ex["u"]) + ")"
        lines += [
            f"case        {ex['case_path']}",
            f"u           {u}",
            f"tau         {ex['tau']:.6g}",
            f"zeta~       {ex['objective']:.10g}",
            f"splits      {ex['split_count']}",
        ]
    return "\n".join(lines)


def cmd_solve(args, out) -> int:
    doc = _read_instance(args.input)
    Q = None
    if args.Q is not None:
        Q = _parse_matrix(args.Q, doc.n)
    elif args.Q_file:
        other = _read_instance(args.Q_file)
        if other.Q is None:
            raise UsageError(f"{args.Q_file} has no Q")
        Q = other.Q
    try:
        inst = doc.instance(objective=args.objective, Q=Q)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    sol = solve_relaxation(inst, _options(args))
    rep = solve_report(inst, sol)
    _emit(args, rep, _solve_text(rep), out)
    code = STATUS_EXIT[sol.status]
    if code == EXIT_OK and rep["extraction"] is not None and "error" in rep["extraction"]:
        code = EXIT_EXTRACT
    return code


# verify --------------------------------------------------------------------


def cmd_verify(args, out) -> int:
    doc = _read_instance(args.input)
    which = args.condition or ["D", "Dprime", "Cprime", "Bprime"]
    reports = []
    for name in dict.fromkeys(which):
        if name == "D":
            reports.append(verify_condition_D(doc.constraints))
        elif name == "Dprime":
            reports.append(verify_condition_Dprime(doc.constraints))
        elif name == "Cprime":
            reports.append(verify_condition_Cprime(doc.constraints))
        else:
            if args.bbox is not None:
                if doc.n != 3:
                    raise UsageError("--bbox with four numbers only fits 2-D instances")
                bbox = ((args.bbox[0], args.bbox[1]), (args.bbox[2], args.bbox[3]))
            else:
                bbox = ((-6.0, 6.0),) * (doc.n - 1)
            reports.append(falsify_condition_Bprime(doc.constraints, bbox, args.samples, args.seed))
    ok = all(r.passed for r in reports)
    text = []
    for r in reports:
        text.append(r.summary())
        for w in r.witnesses[:5]:
            text.append(f"  witness {w}")
    _emit(args, {"passed": ok, "reports": [r.to_dict() for r in reports]}, "\n".join(text), out)
    return EXIT_OK if ok else EXIT_MISMATCH


# render --------------------------------------------------------------------


def cmd_render(args, out) -> int:
    doc = _read_instance(args.input)
    if doc.n != 3:
        raise UsageError(f"render needs a 2-D instance (n = 3), got n = {doc.n}")
    x0, x1, y0, y1 = args.bbox
    try:
        spec = RenderSpec(bbox=((x0, x1), (y0, y1)), resolution=args.resolution)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    svg = render_svg(doc.constraints, spec)
    Path(args.out).write_text(svg)
    _emit(args, {"out": args.out, "layers": len(doc.constraints)}, f"wrote {args.out} ({len(doc.constraints)} layers)", out)
    return EXIT_OK


# table1 --------------------------------------------------------------------


def cmd_table1(args, out) -> int:
    start = time.perf_counter()
    rows = run_table1(_options(args))
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in rows)
    payload = {"passed": ok, "rows": [r.to_dict() for r in rows]}
    text = format_table1(rows) + f"\n{'all rows match' if ok else 'MISMATCH'}"
    _emit(args, payload, text, out)
    # timing goes to stderr so stdout stays byte-identical across runs
    sys.stderr.write(f"table1 finished in {elapsed:.2f} s\n")
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "render": cmd_render,
    "table1": cmd_table1,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        return COMMANDS[args.verb](args, out)
    except (UsageError, fileio.InstanceFormatError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
