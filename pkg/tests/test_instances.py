import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import d_corpus, lift_sets
from exactqcqp import instances as inst
from exactqcqp.constraints import Constraint, ConstraintSet, evaluate, evaluate_many, is_feasible
from exactqcqp.symmat import is_psd
from exactqcqp.verify import verify_condition_D


@pytest.mark.parametrize("name", sorted(d_corpus()))
def test_corpus_passes_condition_d(name):
    assert verify_condition_D(d_corpus()[name]).passed


@pytest.mark.parametrize("name", sorted(lift_sets()))
def test_lifted_sets_pass_condition_d(name):
    assert verify_condition_D(lift_sets()[name]).passed


# disk ring -----------------------------------------------------------------


def test_disk_ring_structure():
    s = inst.instance_disk_ring(0.5)
    assert len(s) == 8
    assert s.alphas == (1.0,) * 7 + (1.0 / 3.0,)
    assert s.labels == [f"B{k}" for k in range(8)]
    # B0 is the disk around (1, 0); B_k around the unit-circle point at angle k*pi/3
    for k in range(6):
        centre = (np.cos(k * np.pi / 3), np.sin(k * np.pi / 3))
        assert evaluate(s[k], centre) == pytest.approx(-0.25)
    assert not is_feasible(s, (0.0, 0.0))
    assert not is_feasible(s, (1.6, 0.0))  # outside the big disk


def test_disk_ring_range():
    for r in (0.0, 0.51, -1.0):
        with pytest.raises(ValueError):
            inst.instance_disk_ring(r)


# hyperbola fan and parabola star --------------------------------------------


@pytest.mark.parametrize("m, r, p", [(2, 1.0, (1.0, 1.0)), (5, 2.0, (-1.0, 0.0))])
def test_hyperbola_fan(m, r, p):
    s = inst.instance_hyperbola_fan(m, r, p)
    assert len(s) == m + 1
    assert not is_feasible(s, p)
    assert evaluate(s[m], p) == pytest.approx(-r * r)


def test_hyperbola_fan_errors():
    with pytest.raises(ValueError):
        inst.instance_hyperbola_fan(1)
    with pytest.raises(ValueError):
        inst.instance_hyperbola_fan(2, 0.0)


@pytest.mark.parametrize("m, r", [(3, 1.0), (7, 2.0)])
def test_parabola_star(m, r):
    s = inst.instance_parabola_star(m, r)
    assert len(s) == m + 1
    assert s.alphas[-1] == pytest.approx(1.0 / (2.0 * r))
    assert not is_feasible(s, (0.0, 0.0))


def test_parabola_star_errors():
    with pytest.raises(ValueError):
        inst.instance_parabola_star(2, 1.0)


# integer-shift families -----------------------------------------------------


def test_hyperbola_family_member_and_value():
    np.testing.assert_array_equal(inst.hyperbola_member(2, 1), [[3.75, -2, 0], [-2, 1, 0], [0, 0, 1]])
    s = inst.family_hyperbola([(0, 1)])
    assert evaluate(s[0], (0, 0)) == 1.0


@settings(max_examples=100)
@given(st.integers(-6, 6), st.integers(-6, 6), st.floats(0, 3), st.floats(0, 3))
def test_hyperbola_family_pairs_psd(a1, a2, r1, r2):
    if a1 == a2:
        return
    assert is_psd(inst.hyperbola_member(a1, r1) + inst.hyperbola_member(a2, r2), 1e-9)


@settings(max_examples=100)
@given(st.integers(-6, 6), st.integers(-6, 6), st.floats(1, 5), st.floats(1, 5))
def test_parabola_family_pairs_psd(a1, a2, r1, r2):
    if a1 == a2:
        return
    assert is_psd(inst.parabola_member(a1, r1) + inst.parabola_member(a2, r2), 1e-9)


def test_family_errors():
    with pytest.raises(ValueError):
        inst.family_hyperbola([(1, 1), (1, 2)])
    with pytest.raises(ValueError):
        inst.family_hyperbola([(0.5, 1)])
    with pytest.raises(ValueError):
        inst.family_parabola([(0, 0.5)])
    with pytest.raises(ValueError):
        inst.family_parabola([(2, 1), (2, 3)])


def test_parabola_family_values():
    s = inst.family_parabola([(0, 1)])
    assert evaluate(s[0], (0, 0)) == 1.0
    assert is_psd(inst.parabola_member(2, 1) + inst.parabola_member(0, 2))


# convex combination --------------------------------------------------------


def test_convex_combine_formula():
    a = inst.instance_disk_ring(0.5)
    c = inst.instance_parabola_star(7, 2.0)
    mix = inst.convex_combine(a, c, 0.09)
    k = 7
    expected = 0.09 * a.alphas[k] * a.matrices[k] + 0.91 * c.alphas[k] * c.matrices[k]
    np.testing.assert_allclose(mix.matrices[k], expected, atol=1e-15)
    assert mix.alphas == (1.0,) * 8


def test_convex_combine_self_preserves_zones():
    a = inst.family_parabola([(2, 1), (0, 2)])
    mix = inst.convex_combine(a, a, 0.5)
    pts = np.random.default_rng(0).uniform(-4, 4, (500, 2))
    for m0, m1 in zip(a.matrices, mix.matrices):
        np.testing.assert_array_equal(np.sign(evaluate_many(m0, pts)), np.sign(evaluate_many(m1, pts)))


def test_convex_combine_order_matters():
    a = inst.instance_disk_ring(0.5)
    c = inst.instance_parabola_star(7, 2.0)
    perm = ConstraintSet(c.constraints[1:] + c.constraints[:1], c.alphas[1:] + c.alphas[:1])
    m1 = inst.convex_combine(a, c, 0.09).matrices
    m2 = inst.convex_combine(a, perm, 0.09).matrices
    assert not all(np.allclose(x, y) for x, y in zip(m1, m2))
    assert verify_condition_D(inst.convex_combine(a, perm, 0.09)).passed


def test_convex_combine_errors_and_warning():
    a = inst.instance_disk_ring(0.5)
    with pytest.raises(ValueError):
        inst.convex_combine(a, a, 0.0)
    with pytest.raises(ValueError):
        inst.convex_combine(a, a, 1.0)
    with pytest.raises(ValueError, match="dummy_pad"):
        inst.convex_combine(a, inst.instance_strip(), 0.5)
    plain = ConstraintSet(a.constraints)
    assert "warning" in inst.convex_combine(plain, a, 0.5).metadata


# strip ---------------------------------------------------------------------


def test_strip_members():
    s = inst.instance_strip()
    assert len(s) == 2
    assert is_feasible(s, (1, 1))
    assert not is_feasible(s, (2, 1))
    assert evaluate(inst.instance_strip_single()[0], (0, 2)) == 0.0


def test_strip_regions_equal():
    xs = np.linspace(-4, 4, 201)
    pts = np.stack(np.meshgrid(xs, xs), -1).reshape(-1, 2)
    from exactqcqp.constraints import feasible_mask

    a = feasible_mask(inst.instance_strip(), pts, 1e-8)
    b = feasible_mask(inst.instance_strip_single(), pts, 1e-8)
    np.testing.assert_array_equal(a, b)


def test_strip_sum_is_psd():
    s = inst.instance_strip()
    np.testing.assert_array_equal(s.matrices[0] + s.matrices[1], np.diag([0.0, 0.0, 4.0]))


# balls -----------------------------------------------------------------------


def test_balls():
    s = inst.family_balls([((0, 0, 0), 0.5), ((1, 0, 0), 0.5)])
    assert is_psd(s.matrices[0] + s.matrices[1])
    assert evaluate(s[1], (1, 0, 0)) == pytest.approx(-0.25)


def test_balls_one_dimensional_by_hand():
    # (u - a)^2 - rho^2: zones are [a - rho, a + rho]
    s = inst.family_balls([((0,), 0.5), ((1,), 0.25)])
    np.testing.assert_array_equal(s.matrices[1], [[1, -1], [-1, 1 - 0.0625]])
    assert not is_feasible(s, (0.3,))
    assert not is_feasible(s, (1.2,))
    assert is_feasible(s, (0.6,))
    assert is_feasible(s, (0.5,))


def test_balls_errors():
    with pytest.raises(ValueError):
        inst.family_balls([((0, 0), 0.5), ((0, 0), 0.25)])
    with pytest.raises(ValueError):
        inst.family_balls([((0.5, 0), 0.5)])
    with pytest.raises(ValueError):
        inst.family_balls([((0, 0), 0.6)])


# padding and lifting ---------------------------------------------------------


def test_dummy_pad_psd_set_appends_zero():
    s = ConstraintSet((Constraint(np.eye(3)), Constraint(np.diag([1.0, 2.0, 0.0]))))
    p = inst.dummy_pad(s, 2)
    assert len(p) == 4
    np.testing.assert_array_equal(p.matrices[-1], np.zeros((3, 3)))
    assert verify_condition_D(p).passed


def test_dummy_pad_disk_ring():
    s = inst.instance_disk_ring(0.5)
    p = inst.dummy_pad(s, 3)
    lam = max(-np.linalg.eigvalsh(a * m)[0] for a, m in zip(s.alphas, s.matrices))
    assert p.metadata["padding"]["lambda"] == pytest.approx(lam, abs=1e-11)
    assert verify_condition_D(p).passed
    with pytest.raises(ValueError):
        inst.dummy_pad(s, 0)


def test_scalar_pad():
    p = inst.dummy_pad(inst.scalar_set([-0.25]), 3)
    assert [m[0, 0] for m in p.matrices][1:] == [pytest.approx(0.25)] * 3
    assert verify_condition_D(p).passed


def test_lift_combination_is_convex_combination():
    a = inst.instance_disk_ring(0.5)
    b = inst.instance_disk_ring(1.0 / 3.0)
    lam = 0.3
    lifted = inst.lift(a, b, inst.combination_matrix(lam))
    mixed = inst.convex_combine(a, b, lam)
    for x, y in zip(lifted.matrices, mixed.matrices):
        np.testing.assert_allclose(x, y, atol=1e-14)


def test_splitting_matrix_layout():
    lam = 0.25
    L = inst.splitting_matrix(lam)
    a, b = np.sqrt(lam), np.sqrt(1 - lam)
    expected = np.array(
        [
            [a, 0, 0, 0, 0],
            [0, a, 0, 0, 0],
            [0, 0, 0, 0, a],
            [0, 0, b, 0, 0],
            [0, 0, 0, b, 0],
            [0, 0, 0, 0, b],
        ]
    )
    np.testing.assert_array_equal(L, expected)


def test_lift_splitting_is_separable():
    a = inst.instance_disk_ring(0.5)
    b = inst.instance_parabola_star(7, 2.0)
    lam = 0.4
    lifted = inst.lift(a, b, inst.splitting_matrix(lam))
    rng = np.random.default_rng(5)
    for _ in range(20):
        u1, u2 = rng.normal(size=2), rng.normal(size=2)
        for k in range(len(a)):
            lhs = evaluate(lifted[k], np.concatenate([u1, u2]))
            rhs = lam * a.alphas[k] * evaluate(a[k], u1) + (1 - lam) * b.alphas[k] * evaluate(b[k], u2)
            assert lhs == pytest.approx(rhs, abs=1e-12)


def test_lift_permutation_gives_hyperbola_family():
    G = [(2, 1.0), (1, 1.0), (0, 1.0), (-1, 1.0), (-2, 1.0)]
    balls = inst.family_balls([((a,), 0.5) for a, _ in G])
    scalars = inst.scalar_set([r * r for _, r in G])
    L = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    lifted = inst.lift(balls, scalars, L)
    for x, y in zip(lifted.matrices, inst.family_hyperbola(G).matrices):
        np.testing.assert_array_equal(x, y)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lift_preserves_condition_d(seed):
    rng = np.random.default_rng(seed)
    a = inst.instance_parabola_star(3, 1.0)
    b = inst.family_balls([((0, 0), 0.5), ((1, 0), 0.5), ((0, 1), 0.3), ((2, 2), 0.5)])
    L = rng.normal(size=(6, int(rng.integers(2, 7))))
    out = inst.lift(a, b, L)
    for i, j in itertools.combinations(range(len(out)), 2):
        m = out.matrices[i] + out.matrices[j]
        assert np.linalg.eigvalsh(m)[0] >= -1e-9 * max(1.0, np.abs(np.linalg.eigvalsh(m)).max())


def test_lift_errors():
    a = inst.instance_disk_ring(0.5)
    with pytest.raises(ValueError, match="dummy_pad"):
        inst.lift(a, inst.scalar_set([1.0]), np.eye(4))
    with pytest.raises(ValueError):
        inst.lift(a, a, np.eye(5))


# linear equality -----------------------------------------------------------


def test_linear_equality_line():
    c = inst.linear_equality([[1.0, 1.0]], [0.0])
    assert evaluate(c, (2.0, -2.0)) == 0.0
    assert evaluate(c, (1.0, 0.5)) < 0


def test_linear_equality_point():
    c = inst.linear_equality(np.eye(2), [1.0, 2.0])
    assert evaluate(c, (1.0, 2.0)) == 0.0
    rng = np.random.default_rng(1)
    for u in rng.normal(size=(20, 2)):
        assert evaluate(c, u) == pytest.approx(-np.sum((u - [1.0, 2.0]) ** 2))


def test_linear_equality_errors():
    with pytest.raises(ValueError):
        inst.linear_equality([[1.0, 1.0]], [0.0, 1.0])


# instance container --------------------------------------------------------


def test_qcqp_instance_validation():
    s = inst.instance_strip()
    q = inst.QcqpInstance.homogeneous(inst.strip_objective(), s)
    assert q.n == 3 and q.m == 2
    np.testing.assert_array_equal(q.H, np.diag([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        inst.QcqpInstance.homogeneous(np.eye(4), s)
    q2 = q.with_objective(np.eye(3))
    np.testing.assert_array_equal(q2.Q, np.eye(3))


def test_example41_matrices():
    cset, objs = inst.example41()
    assert len(cset) == 3 and sorted(objs) == [f"q{k}" for k in range(1, 7)]
    # q5 = (u1 + 4 u2 - 4)^2 as a Gram form
    w = np.array([1.0, 4.0, -4.0])
    np.testing.assert_array_equal(objs["q5"], np.outer(w, w))
