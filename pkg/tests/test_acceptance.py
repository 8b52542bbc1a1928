"""One test per acceptance criterion. Each prints a PASS/FAIL line, collected
again in the terminal summary."""

import io
import json
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from corpus import BOUNDED_BBOX, bounded_2d, d_corpus, lift_sets, random_sym
from exactqcqp import fileio
from exactqcqp import instances as inst
from exactqcqp.cli import main
from exactqcqp.constraints import is_feasible
from exactqcqp.extract import Rank1Decomposition, extract, sturm_split
from exactqcqp.sdp import OPTIMAL, UNBOUNDED, solve_relaxation
from exactqcqp.table1 import run_table1
from exactqcqp.verify import brute_force_2d, verify_condition_D


def record(number, title, ok, elapsed, limit, detail=""):
    within = limit is None or elapsed < limit
    budget = "no limit" if limit is None else f"limit {limit:g} s"
    line = f"{'PASS' if ok and within else 'FAIL'} criterion {number}: {title} ({elapsed:.2f} s, {budget})"
    if detail:
        line += f" {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert within, line


def test_criterion_1_table1():
    start = time.perf_counter()
    rows = run_table1()
    elapsed = time.perf_counter() - start
    expected = (0.0, 4.0, -2.0, 0.0, 0.0, 0.0)
    points = {0: (2.0, 1.0), 1: (-1.0, 0.0), 2: (-1.0, 0.0)}
    cset, _ = inst.example41()
    ok = True
    for k, row in enumerate(rows):
        ok &= row.status == OPTIMAL and abs(row.eta - expected[k]) <= 1e-4
        ok &= row.u is not None and is_feasible(cset, row.u, 1e-7)
        if k in points:
            ok &= bool(np.max(np.abs(row.u - np.array(points[k]))) <= 1e-3)
    ok &= abs(rows[4].u[0] + 4 * rows[4].u[1] - 4) <= 1e-3
    ok &= abs(rows[5].u[0] - 3) <= 1e-3
    ok &= rows[5].case_path == "ii_then_i"
    etas = ", ".join(f"{r.eta:.5f}" for r in rows)
    record(1, "table1 reproduction", ok, elapsed, 5.0, f"eta = ({etas})")


def test_criterion_2_condition_d_corpus():
    start = time.perf_counter()
    failed = [name for name, s in d_corpus().items() if not verify_condition_D(s).passed]
    elapsed = time.perf_counter() - start
    record(2, "condition (D) corpus", not failed, elapsed, 1.0, f"{len(d_corpus())} sets, failed: {failed}")


def test_criterion_3_exactness_sweep():
    start = time.perf_counter()
    worst_eta = worst_ext = 0.0
    ok = True
    for idx, (name, cset) in enumerate(sorted(bounded_2d().items())):
        rng = np.random.default_rng(100 + idx)
        for _ in range(20):
            instance = inst.QcqpInstance.homogeneous(random_sym(rng, 3), cset)
            sol = solve_relaxation(instance)
            zeta, _ = brute_force_2d(instance, BOUNDED_BBOX)
            if sol.status != OPTIMAL or not np.isfinite(zeta):
                ok = False
                continue
            scale = 1 + abs(zeta)
            worst_eta = max(worst_eta, abs(sol.objective - zeta) / scale)
            res = extract(instance, sol)
            ok &= is_feasible(cset, res.u, 1e-7)
            worst_ext = max(worst_ext, abs(res.objective - zeta) / scale)
    ok &= worst_eta <= 1e-3 and worst_ext <= 2e-3
    elapsed = time.perf_counter() - start
    record(3, "exactness sweep", ok, elapsed, 60.0, f"worst |eta-zeta| {worst_eta:.1e}, worst extracted {worst_ext:.1e}")


def test_criterion_4_strip_pathology():
    start = time.perf_counter()
    Q = inst.strip_objective()
    two = solve_relaxation(inst.QcqpInstance.homogeneous(Q, inst.instance_strip()))
    single_inst = inst.QcqpInstance.homogeneous(Q, inst.instance_strip_single())
    one = solve_relaxation(single_inst)
    res = extract(single_inst, one)
    elapsed = time.perf_counter() - start
    ok = two.status == UNBOUNDED and one.status == OPTIMAL
    ok &= abs(one.objective + 4.0) <= 1e-4
    ok &= abs(abs(res.u[0] + res.u[1]) - 2.0) <= 1e-3
    record(4, "strip pathology", ok, elapsed, 1.0, f"strip: {two.status}; single: eta = {one.objective:.6f}, u = {np.round(res.u, 5).tolist()}")


def test_criterion_5_sturm_split():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst_form = worst_rec = 0.0
    ok = True
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        r = int(rng.integers(1, n + 1))
        g = rng.normal(size=(n, r))
        x = g @ g.T
        b = random_sym(rng, n)
        b = b - (np.sum(b * x) / np.sum(x * x)) * x
        out, count = sturm_split(Rank1Decomposition(tuple(g.T)), b)
        scale = max(1.0, np.linalg.norm(b) * np.trace(x))
        worst_form = max(worst_form, max(abs(f @ b @ f) for f in out.factors) / scale)
        worst_rec = max(worst_rec, np.linalg.norm(out.matrix() - x) / max(1.0, np.linalg.norm(x)))
        ok &= count <= r * r
    ok &= worst_form <= 1e-8 and worst_rec <= 1e-8
    elapsed = time.perf_counter() - start
    record(5, "sturm split property suite", ok, elapsed, 10.0, f"max |B.xx^T| {worst_form:.1e}, reconstruction {worst_rec:.1e}")


def test_criterion_6_lift_preservation():
    start = time.perf_counter()
    sets = lift_sets()
    ok = all(verify_condition_D(s).passed for s in sets.values())
    s6 = sets["padded-6"]
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(5):
        instance = inst.QcqpInstance(random_sym(rng, 6), np.eye(6), s6)
        sol = solve_relaxation(instance)
        if sol.status != OPTIMAL:
            ok = False
            continue
        res = extract(instance, sol)
        bx = [float(np.sum(b * res.X_tilde)) for b in s6.matrices]
        ok &= min(bx) >= -1e-7
        ok &= np.linalg.matrix_rank(res.X_tilde, tol=1e-9) == 1
        worst = max(worst, abs(res.objective - sol.objective) / max(1.0, abs(sol.objective)))
    ok &= worst <= 1e-5
    elapsed = time.perf_counter() - start
    dims = {k: s.n for k, s in sets.items()}
    record(6, "lift preservation", ok, elapsed, 30.0, f"dims {dims}, worst relative objective gap {worst:.1e}")


def test_criterion_7_determinism_and_round_trip(tmp_path):
    start = time.perf_counter()
    ok = True
    for s in {**d_corpus(), **lift_sets()}.values():
        doc = fileio.InstanceFile.from_set(s)
        ok &= fileio.loads(fileio.dumps(doc)) == doc
    path = tmp_path / "ex.json"
    cset, objs = inst.example41()
    fileio.save(fileio.InstanceFile.from_set(cset, objectives=objs), path)
    outputs = []
    for key in objs:
        runs = []
        for _ in range(2):
            buf = io.StringIO()
            main(["--json", "solve", str(path), "--objective", key], out=buf)
            runs.append(buf.getvalue())
        json.loads(runs[0])
        outputs.append(runs[0] == runs[1])
    ok &= all(outputs)
    elapsed = time.perf_counter() - start
    record(7, "determinism and round-trip", ok, elapsed, None)
