"""Reproduce the six-objective example on the region outside a unit disk and
between two parabolas.

Binding checks are the optimal values and the recovered points. SDP ranks and
the ``B . X`` entries depend on which optimal face the solver lands on, so
they are reported next to the published ones but never compared.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .constraints import evaluate, is_feasible
from .extract import ExtractionError, extract
from .instances import QcqpInstance, example41
from .sdp import OPTIMAL, SolverOptions, solve_relaxation
from .symmat import eig

log = logging.getLogger(__name__)

VALUE_TOL = 1e-4
POINT_TOL = 1e-3

EXPECTED_ETA = {"q1": 0.0, "q2": 4.0, "q3": -2.0, "q4": 0.0, "q5": 0.0, "q6": 0.0}
EXPECTED_POINT = {"q1": (2.0, 1.0), "q2": (-1.0, 0.0), "q3": (-1.0, 0.0)}
# published, informative only: rank, B.X entries, case
PUBLISHED = {
    "q1": (1, (5.00, 1.00, 1.00), "ii"),
    "q2": (1, (0.00, 6.00, 3.00), "i"),
    "q3": (2, (0.00, 6.00, 5.26), "i"),
    "q4": (3, (2.00, 3.99, 2.28), "ii"),
    "q5": (2, (1.68, 4.32, 1.42), "ii"),
    "q6": (2, (3.45, 2.55, 7.55), "ii_then_i"),
}


def _on_set(key: str, u: np.ndarray) -> float:
    """Distance-like residual of the equality defining the optimal set."""
    if key == "q5":
        return abs(u[0] + 4.0 * u[1] - 4.0)
    if key == "q6":
        return abs(u[0] - 3.0)
    if key in EXPECTED_POINT:
        return float(np.max(np.abs(u - np.array(EXPECTED_POINT[key]))))
    # q4 vanishes on the whole feasible region, so feasibility is the membership test
    return 0.0


@dataclass
class Table1Row:
    key: str
    status: str
    eta: float
    rank: int
    bx: tuple
    case_path: str | None
    u: np.ndarray | None
    objective: float | None
    margins: tuple
    passed: bool
    problems: list

    def to_dict(self) -> dict:
        return {
            "k": int(self.key[1:]),
            "status": self.status,
            "eta": self.eta,
            "rank": self.rank,
            "B_dot_X": list(self.bx),
            "case_path": self.case_path,
            "u": None if self.u is None else [float(v) for v in self.u],
            "objective": self.objective,
            "feasibility_margins": list(self.margins),
            "passed": self.passed,
            "problems": list(self.problems),
        }


def run_table1(opts: SolverOptions | None = None) -> list[Table1Row]:
    cset, objectives = example41()
    rows = []
    for key, Q in objectives.items():
        inst = QcqpInstance.homogeneous(Q, cset)
        sol = solve_relaxation(inst, opts)
        values = eig(sol.X).values
        rank = int(np.sum(values > 1e-6 * max(values[0], 1.0)))
        bx = tuple(float(np.sum(b * sol.X)) for b in inst.matrices)
        problems = []
        case_path = u = objective = None
        margins = ()
        if sol.status != OPTIMAL:
            problems.append(f"solver status {sol.status}")
        else:
            if abs(sol.objective - EXPECTED_ETA[key]) > VALUE_TOL:
                problems.append(f"eta {sol.objective:.6f} != {EXPECTED_ETA[key]}")
            try:
                res = extract(inst, sol)
            except ExtractionError as exc:
                problems.append(f"extraction failed: {exc}")
            else:
                case_path, u, objective = res.case_path, res.u, res.objective
                margins = tuple(evaluate(c, u) for c in cset)
                if not is_feasible(cset, u, 1e-7):
                    problems.append("extracted point infeasible")
                if abs(objective - EXPECTED_ETA[key]) > VALUE_TOL:
                    problems.append(f"extracted objective {objective:.6f} != {EXPECTED_ETA[key]}")
                if _on_set(key, u) > POINT_TOL:
                    problems.append(f"u = {u.tolist()} misses the optimal set")
                if key == "q6" and case_path != "ii_then_i":
                    problems.append(f"case path {case_path}, expected ii_then_i")
        pub = PUBLISHED[key]
        log.info("%s: rank %d (published %d), B.X %s (published %s)", key, rank, pub[0], np.round(bx, 2), pub[1])
        rows.append(Table1Row(key, sol.status, sol.objective, rank, bx, case_path, u, objective, margins, not problems, problems))
    return rows


def format_table1(rows: list[Table1Row]) -> str:
    head = f"{'k':>2} {'eta':>9} {'rank':>4} {'B1.X':>7} {'B2.X':>7} {'B3.X':>7} {'case':>10} {'u':>22} {'min margin':>11}  ok"
    lines = [head, "-" * len(head)]
    for r in rows:
        u = "-" if r.u is None else f"({r.u[0]:+.5f}, {r.u[1]:+.5f})"
        margin = "-" if not r.margins else f"{min(r.margins):.2e}"
        bx = " ".join(f"{v:7.2f}" for v in r.bx)
        lines.append(
            f"{r.key[1:]:>2} {r.eta:9.5f} {r.rank:4d} {bx} {r.case_path or '-':>10} {u:>22} {margin:>11}  "
            + ("yes" if r.passed else "NO: " + "; ".join(r.problems))
        )
    lines.append("published ranks 1/1/2/3/2/2 and B.X entries are solver dependent and shown for reference only")
    return "\n".join(lines)
