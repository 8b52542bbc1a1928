"""Generators for constraint families whose pairwise weighted sums are PSD.

Every generator returns a :class:`ConstraintSet` whose ``alphas`` are the
weights that make ``alpha_A A + alpha_B B`` positive semidefinite for every
distinct pair, so ``verify.verify_condition_D`` passes on the output. Labels
follow the ``B0, B1, ...`` numbering.

Parameter ranges are the ones under which that pairwise property is known to
hold; anything outside raises ``ValueError`` instead of silently producing a
set that may not qualify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    Constraint,
    ConstraintSet,
    conjugate,
    disk,
    hyperbola,
    parabola,
    rotation,
    scaling,
    translation,
)
from .symmat import as_sym, eig, symmetrize

PAD_MARGIN = 1e-12


def last_coordinate_h(n: int) -> np.ndarray:
    """``diag(0, ..., 0, 1)``: pins the homogenizing coordinate to +-1."""
    h = np.zeros((n, n))
    h[-1, -1] = 1.0
    return h


@dataclass(frozen=True)
class QcqpInstance:
    """Minimize ``Q . X`` over rank-1 ``X`` with ``H . X = 1`` and ``B . X >= 0``."""

    Q: np.ndarray
    H: np.ndarray
    constraints: ConstraintSet
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        q = as_sym(self.Q, "Q")
        h = as_sym(self.H, "H")
        if q.shape != h.shape:
            raise ValueError("Q and H must have the same size")
        cset = self.constraints
        if not isinstance(cset, ConstraintSet):
            cset = ConstraintSet(tuple(cset))
        if cset.n is not None and cset.n != q.shape[0]:
            raise ValueError(f"constraints are {cset.n}x{cset.n} but Q is {q.shape[0]}x{q.shape[0]}")
        for name, arr in (("Q", q), ("H", h)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "constraints", cset)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def matrices(self) -> list[np.ndarray]:
        return self.constraints.matrices

    @classmethod
    def homogeneous(cls, Q, constraints, **metadata) -> "QcqpInstance":
        """Instance with ``H = diag(0, ..., 0, 1)``, i.e. a QCQP in ``u``."""
        q = np.asarray(Q, dtype=float)
        return cls(q, last_coordinate_h(q.shape[0]), constraints, metadata)

    def with_objective(self, Q) -> "QcqpInstance":
        return QcqpInstance(np.asarray(Q, dtype=float), self.H, self.constraints, dict(self.metadata))


def _labelled(mats, prefix="B"):
    return tuple(Constraint(m, f"{prefix}{k}") for k, m in enumerate(mats))


def instance_disk_ring(r: float = 0.5) -> ConstraintSet:
    """Six small disks on the unit circle, one at the origin, all inside a
    disk of radius 3/2 (the outside of which is also excluded)."""
    if not 0 < r <= 0.5:
        raise ValueError("r must lie in (0, 1/2]")
    base = disk(r)
    shift = translation((1.0, 0.0))
    mats = [conjugate(base, shift @ rotation(k * np.pi / 3)).matrix for k in range(6)]
    mats.append(base.matrix)
    mats.append(-disk(1.5).matrix)
    alphas = (1.0,) * 7 + (1.0 / 3.0,)
    return ConstraintSet(_labelled(mats), alphas, {"generator": "disk-ring", "r": r})


def instance_hyperbola_fan(m: int = 2, r: float = 1.0, p=(1.0, 1.0)) -> ConstraintSet:
    """``m`` rotated hyperbolas plus a disk, all shifted to centre ``p``."""
    if int(m) != m or m < 2:
        raise ValueError("m must be an integer >= 2")
    if not r > 0:
        raise ValueError("r must be positive")
    m = int(m)
    s = scaling((1.0, np.tan(np.pi / (2 * m))))
    shift = translation(p)
    base = hyperbola(r)
    mats = [conjugate(base, s @ rotation(k * np.pi / m) @ shift).matrix for k in range(m)]
    mats.append(conjugate(disk(r), shift).matrix)
    return ConstraintSet(
        _labelled(mats), (1.0,) * (m + 1), {"generator": "hyperbola-fan", "m": m, "r": r, "p": list(map(float, p))}
    )


def instance_parabola_star(m: int = 3, r: float = 1.0) -> ConstraintSet:
    """``m`` scaled parabolas rotated evenly around a central disk."""
    if int(m) != m or m < 3:
        raise ValueError("m must be an integer >= 3")
    if not r > 0:
        raise ValueError("r must be positive")
    m = int(m)
    s = scaling((1.0, 2.0 * np.tan(np.pi / m) * np.sqrt(r)))
    base = parabola(r)
    mats = [conjugate(base, s @ rotation(2 * k * np.pi / m)).matrix for k in range(m)]
    mats.append(disk(r).matrix)
    alphas = (1.0,) * m + (1.0 / (2.0 * r),)
    return ConstraintSet(_labelled(mats, "C"), alphas, {"generator": "parabola-star", "m": m, "r": r})


def _check_distinct(keys, what):
    seen = set()
    for k in keys:
        if k in seen:
            raise ValueError(f"duplicate {what} {k!r}")
        seen.add(k)


def _check_integer(a):
    if float(a) != int(a):
        raise ValueError(f"slope {a!r} must be an integer")
    return int(a)


def hyperbola_member(a: int, r: float) -> np.ndarray:
    """``(u2 - a u1)^2 - u1^2 / 4 + r^2``."""
    return np.array([[a * a - 0.25, -a, 0.0], [-a, 1.0, 0.0], [0.0, 0.0, r * r]], dtype=float)


def parabola_member(a: int, r: float) -> np.ndarray:
    """``(a u1 - u2)^2 - u1 + r``."""
    return np.array([[a * a, -a, -0.5], [-a, 1.0, 0.0], [-0.5, 0.0, r]], dtype=float)


def family_hyperbola(G) -> ConstraintSet:
    pairs = [(_check_integer(a), float(r)) for a, r in G]
    _check_distinct([a for a, _ in pairs], "slope")
    if any(r < 0 for _, r in pairs):
        raise ValueError("r must be nonnegative")
    mats = [hyperbola_member(a, r) for a, r in pairs]
    return ConstraintSet(
        _labelled(mats), (1.0,) * len(mats), {"generator": "hyperbola-family", "G": [list(p) for p in pairs]}
    )


def family_parabola(G) -> ConstraintSet:
    pairs = [(_check_integer(a), float(r)) for a, r in G]
    _check_distinct([a for a, _ in pairs], "slope")
    if any(r < 1 for _, r in pairs):
        raise ValueError("r must be >= 1")
    mats = [parabola_member(a, r) for a, r in pairs]
    return ConstraintSet(
        _labelled(mats), (1.0,) * len(mats), {"generator": "parabola-family", "G": [list(p) for p in pairs]}
    )


def convex_combine(set_a: ConstraintSet, set_b: ConstraintSet, lam: float) -> ConstraintSet:
    """Member-wise ``lam * alpha_A A^k + (1 - lam) * alpha_B B^k``.

    Both sets need the same cardinality; pad the shorter one with
    :func:`dummy_pad` first.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie strictly between 0 and 1")
    if len(set_a) != len(set_b):
        raise ValueError(
            f"cardinality mismatch ({len(set_a)} vs {len(set_b)}); pad the smaller set with dummy_pad first"
        )
    if set_a.n != set_b.n:
        raise ValueError("dimension mismatch")
    meta = {"generator": "convex-combine", "lambda": lam}
    missing = [name for name, s in (("first", set_a), ("second", set_b)) if s.alphas is None]
    if missing:
        meta["warning"] = f"alphas missing on {' and '.join(missing)} set; all-ones assumed"
    mats = [
        lam * wa * a.matrix + (1.0 - lam) * wb * b.matrix
        for wa, a, wb, b in zip(set_a.weights(), set_a, set_b.weights(), set_b)
    ]
    return ConstraintSet(_labelled(mats, "A"), (1.0,) * len(mats), meta)


def instance_strip() -> ConstraintSet:
    """``-2 <= u1 + u2 <= 2`` written as two half-planes."""
    b2 = np.array([[0.0, 0.0, 0.5], [0.0, 0.0, 0.5], [0.5, 0.5, 2.0]])
    b3 = np.array([[0.0, 0.0, -0.5], [0.0, 0.0, -0.5], [-0.5, -0.5, 2.0]])
    return ConstraintSet((Constraint(b2, "B2"), Constraint(b3, "B3")), (1.0, 1.0), {"generator": "strip"})


def instance_strip_single() -> ConstraintSet:
    """The same strip as one quadratic inequality ``4 - (u1 + u2)^2 >= 0``."""
    b4 = np.array([[-1.0, -1.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 0.0, 4.0]])
    return ConstraintSet((Constraint(b4, "B4"),), (1.0,), {"generator": "strip-single"})


def strip_objective() -> np.ndarray:
    """``-(u1 + u2)^2``: unbounded below on the two-half-plane relaxation."""
    return np.array([[-1.0, -1.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])


def ball_member(a, rho: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    k = a.shape[0]
    m = np.zeros((k + 1, k + 1))
    m[:k, :k] = np.eye(k)
    m[:k, k] = -a
    m[k, :k] = -a
    m[k, k] = a @ a - rho * rho
    return m


def family_balls(G) -> ConstraintSet:
    """Exteriors of balls with distinct integer centres and radius at most 1/2."""
    entries = []
    for a, rho in G:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if not np.all(a == np.round(a)):
            raise ValueError(f"centre {a.tolist()} must be integral")
        if not 0 < rho <= 0.5:
            raise ValueError("rho must lie in (0, 1/2]")
        entries.append((a, float(rho)))
    if len({a.shape for a, _ in entries}) > 1:
        raise ValueError("centres must share one dimension")
    _check_distinct([tuple(a.tolist()) for a, _ in entries], "centre")
    mats = [ball_member(a, rho) for a, rho in entries]
    meta = {"generator": "balls", "G": [[a.tolist(), rho] for a, rho in entries]}
    return ConstraintSet(_labelled(mats), (1.0,) * len(mats), meta)


def dummy_pad(cset: ConstraintSet, count: int) -> ConstraintSet:
    """Append ``count`` copies of ``lam * I``, with ``lam`` large enough that
    every pairwise sum involving a copy stays PSD."""
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    if cset.n is None:
        raise ValueError("cannot pad an empty set: its dimension is unknown")
    scaled = cset.scaled()
    worst = max(-eig(m).values[-1] for m in scaled.matrices)
    lam = max(0.0, worst)
    if lam > 0:
        lam += PAD_MARGIN
    start = len(cset)
    pads = tuple(Constraint(lam * np.eye(cset.n), f"pad{start + i}") for i in range(int(count)))
    meta = dict(cset.metadata)
    meta["padding"] = {"count": int(count), "lambda": lam}
    return ConstraintSet(scaled.constraints + pads, (1.0,) * (start + int(count)), meta)


def scalar_set(values) -> ConstraintSet:
    """A family of 1x1 constraints, e.g. the seed ``{sigma_1}`` for a lift."""
    vals = [float(v) for v in values]
    return ConstraintSet(
        tuple(Constraint(np.array([[v]]), f"s{k}") for k, v in enumerate(vals)), (1.0,) * len(vals), {"generator": "scalar"}
    )


def congruence(b, L) -> np.ndarray:
    """``L^T B L`` for a rectangular ``L``; the general form of conjugation."""
    mat = b.matrix if isinstance(b, Constraint) else np.asarray(b, dtype=float)
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != mat.shape[0]:
        raise ValueError(f"L has shape {L.shape}, expected {mat.shape[0]} rows")
    return symmetrize(L.T @ mat @ L)


def block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na, nb = a.shape[0], b.shape[0]
    out = np.zeros((na + nb, na + nb))
    out[:na, :na] = a
    out[na:, na:] = b
    return out


def lift(set_b: ConstraintSet, set_c: ConstraintSet, L) -> ConstraintSet:
    """Member-wise ``L^T blockdiag(B^i, C^i) L``.

    The alphas of both inputs are absorbed first, so if both inputs pass the
    pairwise PSD test with their alphas, the output passes with all-ones.
    """
    if len(set_b) != len(set_c):
        raise ValueError(
            f"cardinality mismatch ({len(set_b)} vs {len(set_c)}); pad the smaller set with dummy_pad first"
        )
    if len(set_b) == 0:
        raise ValueError("cannot lift empty sets")
    L = np.asarray(L, dtype=float)
    rows = set_b.n + set_c.n
    if L.ndim != 2 or L.shape[0] != rows:
        raise ValueError(f"L must have {rows} rows (got shape {L.shape})")
    sb, sc = set_b.scaled(), set_c.scaled()
    mats = [congruence(block_diag(b.matrix, c.matrix), L) for b, c in zip(sb, sc)]
    meta = {"generator": "lift", "n_in": [set_b.n, set_c.n], "n_out": int(L.shape[1])}
    return ConstraintSet(_labelled(mats), (1.0,) * len(mats), meta)


def combination_matrix(lam: float, n: int = 3) -> np.ndarray:
    """Stacked ``[sqrt(lam) I; sqrt(1-lam) I]``: both blocks see the same
    variables, so the lift is the convex combination of the two forms."""
    if not 0 < lam < 1:
        raise ValueError("lambda must lie strictly between 0 and 1")
    return np.vstack([np.sqrt(lam) * np.eye(n), np.sqrt(1.0 - lam) * np.eye(n)])


def splitting_matrix(lam: float, n_b: int = 3, n_c: int = 3) -> np.ndarray:
    """Give each block its own variables but share the last (homogenizing)
    coordinate. Maps ``(u1, u2, z)`` with ``u1`` of length ``n_b - 1`` and
    ``u2`` of length ``n_c - 1`` to ``(sqrt(lam)(u1, z), sqrt(mu)(u2, z))``.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie strictly between 0 and 1")
    nb, nc = int(n_b), int(n_c)
    out = nb + nc - 1
    L = np.zeros((nb + nc, out))
    a, b = np.sqrt(lam), np.sqrt(1.0 - lam)
    for i in range(nb - 1):
        L[i, i] = a
    L[nb - 1, out - 1] = a
    for i in range(nc - 1):
        L[nb + i, nb - 1 + i] = b
    L[nb + nc - 1, out - 1] = b
    return L


def linear_equality(A, b) -> Constraint:
    """Encode ``A u = b`` as the single constraint ``-||A u - b||^2 >= 0``.

    ``A`` has one row per equation and one column per variable.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
    W = np.hstack([A, -b[:, None]])
    return Constraint(-(W.T @ W), "lineq")


def example41() -> tuple[ConstraintSet, dict[str, np.ndarray]]:
    """The region ``-2 <= 2 u1 - u2^2 <= 4`` outside the unit disk at (1, 0),
    plus six objectives ``q1 .. q6`` on it."""
    b1 = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 2.0]])
    b2 = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 4.0]])
    b3 = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    cset = ConstraintSet(
        (Constraint(b1, "B1"), Constraint(b2, "B2"), Constraint(b3, "B3")), None, {"generator": "example41"}
    )
    objectives = {
        "q1": np.array([[1.0, 0.0, -2.0], [0.0, 1.0, -1.0], [-2.0, -1.0, 5.0]]),
        "q2": np.array([[1.0, 0.0, 3.0], [0.0, 1.0, 0.0], [3.0, 0.0, 9.0]]),
        "q3": np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        "q4": np.zeros((3, 3)),
        "q5": np.array([[1.0, 4.0, -4.0], [4.0, 16.0, -16.0], [-4.0, -16.0, 16.0]]),
        "q6": np.array([[1.0, 0.0, -3.0], [0.0, 0.0, 0.0], [-3.0, 0.0, 9.0]]),
    }
    return cset, objectives
