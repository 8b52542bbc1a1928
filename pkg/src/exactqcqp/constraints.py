"""Basic quadratic constraints in two variables and their affine transforms.

A constraint ``B`` describes the region ``{u : (u;1)^T B (u;1) >= 0}``; its
restricted zone is where the form is ``<= 0``. Every basic constraint is a
3x3 symmetric matrix acting on the homogenized point ``(u1, u2, 1)``.

Transforms follow the convention ``(u;1) = M (v;1)``: conjugating ``B`` by
``M`` gives ``M^T B M``, the same constraint written in the new variable
``v``. Composition order matters; ``conjugate(conjugate(B, M1), M2)`` equals
``conjugate(B, M1 @ M2)`` and the two are generally different from applying
``M2`` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symmat import as_sym, symmetrize

FEAS_TOL = 1e-8


@dataclass(frozen=True)
class Constraint:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = as_sym(self.matrix, name=f"constraint {self.label!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Constraint):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.label, self.matrix.tobytes()))


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered, labelled family of constraints sharing one dimension.

    ``alphas`` are the positive pair weights used by the pairwise PSD test;
    ``None`` means they were never supplied.
    """

    constraints: tuple[Constraint, ...] = ()
    alphas: tuple[float, ...] | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cons = tuple(self.constraints)
        object.__setattr__(self, "constraints", cons)
        dims = {c.n for c in cons}
        if len(dims) > 1:
            raise ValueError(f"constraints have mixed dimensions {sorted(dims)}")
        if self.alphas is not None:
            alphas = tuple(float(a) for a in self.alphas)
            if len(alphas) != len(cons):
                raise ValueError("alphas must have one entry per constraint")
            if any(not np.isfinite(a) or a <= 0 for a in alphas):
                raise ValueError("alphas must be finite and strictly positive")
            object.__setattr__(self, "alphas", alphas)

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __getitem__(self, i):
        return self.constraints[i]

    @property
    def n(self) -> int | None:
        return self.constraints[0].n if self.constraints else None

    @property
    def matrices(self) -> list[np.ndarray]:
        return [c.matrix for c in self.constraints]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.constraints]

    def weights(self) -> tuple[float, ...]:
        """The alphas, or all ones when none were given."""
        return self.alphas if self.alphas is not None else (1.0,) * len(self)

    def scaled(self) -> "ConstraintSet":
        """Absorb the alphas into the matrices; the regions are unchanged."""
        cons = [Constraint(a * c.matrix, c.label) for a, c in zip(self.weights(), self)]
        return ConstraintSet(tuple(cons), (1.0,) * len(cons), dict(self.metadata))


def disk(r: float) -> Constraint:
    """Exterior of the disk of radius ``r``: ``u1^2 + u2^2 - r^2 >= 0``."""
    if not r > 0:
        raise ValueError("disk radius must be positive")
    return Constraint(np.diag([1.0, 1.0, -r * r]), f"disk({r:g})")


def hyperbola(r: float) -> Constraint:
    """``-u1^2 + u2^2 + r^2 >= 0``."""
    if not r >= 0:
        raise ValueError("hyperbola parameter must be nonnegative")
    return Constraint(np.diag([-1.0, 1.0, r * r]), f"hyperbola({r:g})")


def parabola(r: float) -> Constraint:
    """``-u1 + u2^2 + r >= 0``."""
    if not r >= 0:
        raise ValueError("parabola parameter must be nonnegative")
    m = np.array([[0.0, 0.0, -0.5], [0.0, 1.0, 0.0], [-0.5, 0.0, r]])
    return Constraint(m, f"parabola({r:g})")


def line(r: float) -> Constraint:
    """Half-plane ``u1 - r >= 0``."""
    m = np.array([[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.5, 0.0, -float(r)]])
    return Constraint(m, f"line({r:g})")


def scaling(s) -> np.ndarray:
    """Transform taking ``u`` to ``v = (s1 u1, s2 u2)``."""
    s1, s2 = (float(v) for v in s)
    if not (s1 > 0 and s2 > 0):
        raise ValueError("scaling factors must be positive")
    return np.diag([1.0 / s1, 1.0 / s2, 1.0])


def rotation(theta: float) -> np.ndarray:
    """Transform taking ``u`` to ``u`` rotated counter-clockwise by ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def translation(p) -> np.ndarray:
    """Transform taking ``u`` to ``v = u + p``."""
    p1, p2 = (float(v) for v in p)
    return np.array([[1.0, 0.0, -p1], [0.0, 1.0, -p2], [0.0, 0.0, 1.0]])


def conjugate(b: Constraint, m, label: str | None = None) -> Constraint:
    """Rewrite ``b`` in the variable ``v`` where ``(u;1) = M (v;1)``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (b.n, b.n):
        raise ValueError(f"transform shape {m.shape} does not match constraint of size {b.n}")
    if b.n == 3 and abs(np.linalg.det(m)) <= 1e-12:
        raise ValueError("transform is singular")
    return Constraint(symmetrize(m.T @ b.matrix @ m), b.label if label is None else label)


def homogenize(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return np.concatenate([u, [1.0]])


def evaluate(b, u) -> float:
    """``(u;1)^T B (u;1)`` for a constraint or a bare matrix."""
    mat = b.matrix if isinstance(b, Constraint) else np.asarray(b, dtype=float)
    x = homogenize(u)
    if x.shape[0] != mat.shape[0]:
        raise ValueError(f"point of length {x.shape[0] - 1} does not fit a {mat.shape[0]}x{mat.shape[0]} matrix")
    return float(x @ mat @ x)


def evaluate_many(b, points) -> np.ndarray:
    """Vectorized :func:`evaluate` over an ``(N, n-1)`` array of points."""
    mat = b.matrix if isinstance(b, Constraint) else np.asarray(b, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != mat.shape[0] - 1:
        raise ValueError("point dimension does not match constraint")
    a = mat[:-1, :-1]
    g = mat[:-1, -1]
    c = mat[-1, -1]
    return np.einsum("ni,ij,nj->n", pts, a, pts) + 2.0 * pts @ g + c


def is_feasible(cset, u, feas_tol: float = FEAS_TOL) -> bool:
    """True iff every constraint is ``>= -feas_tol`` at ``u`` (boundaries count)."""
    cons = cset.constraints if isinstance(cset, ConstraintSet) else tuple(cset)
    return all(evaluate(c, u) >= -feas_tol for c in cons)


def feasible_mask(cset, points, feas_tol: float = FEAS_TOL) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mask = np.ones(pts.shape[0], dtype=bool)
    for c in cset:
        mask &= evaluate_many(c, pts) >= -feas_tol
    return mask
