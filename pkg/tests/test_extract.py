import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import BOUNDED_BBOX, bounded_2d, lift_sets, random_sym
from exactqcqp import instances as inst
from exactqcqp.constraints import ConstraintSet, is_feasible
from exactqcqp.extract import (
    ExtractionError,
    ExtractionResult,
    FallbackNeeded,
    Rank1Decomposition,
    extract,
    extract_case_i,
    extract_case_ii,
    sturm_split,
)
from exactqcqp.sdp import OPTIMAL, SolverOptions, solve_relaxation
from exactqcqp.verify import brute_force_2d


def _random_split_case(rng, n, r):
    g = rng.normal(size=(n, r))
    x = g @ g.T
    b = random_sym(rng, n)
    # project so B . X = 0
    b = b - (np.sum(b * x) / np.sum(x * x)) * x
    return Rank1Decomposition(tuple(g.T)), b, x


# sturm_split ---------------------------------------------------------------


def test_split_single_factor_unchanged():
    d = Rank1Decomposition((np.array([1.0, 0.0, 0.0]),))
    b = np.diag([0.0, 1.0, -1.0])
    out, count = sturm_split(d, b)
    assert count == 0
    np.testing.assert_array_equal(out.factors[0], d.factors[0])


def test_split_identity_against_diag():
    # X = I2, B = diag(1,-1): one rotation; each new factor x satisfies x1^2 = x2^2
    d = Rank1Decomposition((np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    b = np.diag([1.0, -1.0])
    out, count = sturm_split(d, b)
    assert count == 1
    for x in out.factors:
        assert x @ b @ x == pytest.approx(0.0, abs=1e-15)
        assert abs(x[0]) == pytest.approx(abs(x[1]))
    np.testing.assert_allclose(out.matrix(), np.eye(2), atol=1e-14)


def test_split_rejects_nonzero_product():
    d = Rank1Decomposition((np.array([1.0, 0.0]),))
    with pytest.raises(ExtractionError):
        sturm_split(d, np.eye(2))


def test_split_empty():
    d = Rank1Decomposition(())
    out, count = sturm_split(d, np.eye(2))
    assert out.r == 0 and count == 0


def test_split_random_trials():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        r = int(rng.integers(1, n + 1))
        d, b, x = _random_split_case(rng, n, r)
        out, count = sturm_split(d, b)
        scale = max(1.0, np.linalg.norm(b) * np.trace(x))
        assert max(abs(f @ b @ f) for f in out.factors) <= 1e-8 * scale
        assert np.linalg.norm(out.matrix() - x) <= 1e-8 * max(1.0, np.linalg.norm(x))
        assert count <= r - 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_split_property(n, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, n + 1))
    d, b, x = _random_split_case(rng, n, r)
    out, count = sturm_split(d, b)
    assert out.r == r
    assert count <= r * r
    assert np.linalg.norm(out.matrix() - x) <= 1e-8 * max(1.0, np.linalg.norm(x))


def test_split_cap():
    d = Rank1Decomposition((np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    with pytest.raises(ExtractionError):
        sturm_split(d, np.diag([1.0, -1.0]), max_steps=0)


def test_decomposition_from_matrix():
    x = np.diag([4.0, 1.0, 0.0])
    d = Rank1Decomposition.from_matrix(x)
    assert d.r == 2
    np.testing.assert_allclose(d.matrix(), x, atol=1e-14)


# cases -----------------------------------------------------------------------


def _ex41(key):
    cset, q = inst.example41()
    return inst.QcqpInstance.homogeneous(q[key], cset)


def test_case_ii_row1():
    instance = _ex41("q1")
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    assert res.case_path == "ii"
    assert res.split_count == 0
    np.testing.assert_allclose(res.u, [2.0, 1.0], atol=1e-3)


def test_case_i_row2():
    instance = _ex41("q2")
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    assert res.case_path == "i"
    np.testing.assert_allclose(res.u, [-1.0, 0.0], atol=1e-3)
    assert res.objective == pytest.approx(4.0, abs=1e-4)
    # X_tilde is rank one with last entry 1
    assert np.linalg.matrix_rank(res.X_tilde, tol=1e-9) == 1
    assert res.X_tilde[-1, -1] == 1.0


def test_row6_falls_back():
    instance = _ex41("q6")
    sol = solve_relaxation(instance)
    out = extract_case_ii(instance, sol)
    assert isinstance(out, FallbackNeeded)
    assert 0.0 < out.theta < 1.0
    assert np.linalg.eigvalsh(out.X_hat)[0] >= -1e-9
    res = extract(instance, sol)
    assert res.case_path == "ii_then_i"
    assert is_feasible(instance.constraints, res.u, 1e-7)
    assert res.objective == pytest.approx(0.0, abs=1e-4)


def test_rank_one_input_passes_through():
    instance = _ex41("q2")
    sol = solve_relaxation(instance)
    res = extract_case_i(instance, sol, 0)
    again = extract_case_i(instance, sol, 0, X=res.X_tilde)
    np.testing.assert_allclose(again.X_tilde, res.X_tilde, atol=1e-9)
    assert again.split_count == 0


def test_tau_bound():
    instance = _ex41("q6")
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    r = Rank1Decomposition.from_matrix(sol.X).r
    assert res.tau >= np.sum(instance.H * sol.X) / r - 1e-9


def test_refuses_non_optimal():
    instance = inst.QcqpInstance.homogeneous(inst.strip_objective(), inst.instance_strip())
    sol = solve_relaxation(instance)
    with pytest.raises(ExtractionError):
        extract(instance, sol)
    sol2 = solve_relaxation(_ex41("q6"), SolverOptions(max_iter=2))
    with pytest.raises(ExtractionError):
        extract(_ex41("q6"), sol2)


def test_zero_objective_gives_feasible_point():
    cset, _ = inst.example41()
    instance = inst.QcqpInstance.homogeneous(np.zeros((3, 3)), cset)
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    assert res.objective == 0.0
    assert is_feasible(cset, res.u, 1e-7)


def test_strip_single_extraction():
    instance = inst.QcqpInstance.homogeneous(inst.strip_objective(), inst.instance_strip_single())
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    assert abs(res.u[0] + res.u[1]) == pytest.approx(2.0, abs=1e-3)
    assert res.objective == pytest.approx(-4.0, abs=1e-4)


def test_general_h_normalization():
    s = lift_sets()["split-5"]
    rng = np.random.default_rng(7)
    instance = inst.QcqpInstance(random_sym(rng, 5), np.eye(5), s)
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    assert res.u is None
    assert np.trace(res.X_tilde) == pytest.approx(1.0, abs=1e-9)
    assert res.objective == pytest.approx(sol.objective, rel=1e-5, abs=1e-7)


# end to end ----------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(bounded_2d()))
def test_matches_brute_force(name):
    rng = np.random.default_rng(sorted(bounded_2d()).index(name))
    cset: ConstraintSet = bounded_2d()[name]
    for _ in range(3):
        instance = inst.QcqpInstance.homogeneous(random_sym(rng, 3), cset)
        sol = solve_relaxation(instance)
        assert sol.status == OPTIMAL
        zeta, _ = brute_force_2d(instance, BOUNDED_BBOX)
        assert abs(sol.t - zeta) <= 1e-3 * (1 + abs(zeta))
        res = extract(instance, sol)
        assert isinstance(res, ExtractionResult)
        assert is_feasible(cset, res.u, 1e-7)
        assert abs(res.objective - zeta) <= 2e-3 * (1 + abs(zeta))
