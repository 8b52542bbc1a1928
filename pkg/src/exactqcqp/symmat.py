"""Dense symmetric matrix helpers.

Symmetric matrices are plain ``numpy`` arrays of shape ``(n, n)``. The
functions here validate symmetry on entry and never mutate their inputs.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

PSD_TOL = 1e-9
RANK_TOL = 1e-8
SYM_TOL = 1e-12
MAX_SWEEPS = 100


class EigenError(np.linalg.LinAlgError):
    """Raised when the Jacobi iteration fails to converge."""


class NotPSDError(ValueError):
    """Raised when a matrix expected to be PSD has a clearly negative eigenvalue."""


class EigenDecomposition(NamedTuple):
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns are orthonormal eigenvectors


def as_sym(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a float array after checking it is square, finite and symmetric."""
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.T)) > SYM_TOL * scale:
        raise ValueError(f"{name} is not symmetric")
    return arr


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def inner(a: np.ndarray, x: np.ndarray) -> float:
    """Frobenius inner product ``sum_ij a_ij x_ij``."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.shape != x.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    return float(np.sum(a * x))


def eig(a, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition by cyclic Jacobi rotations.

    Eigenvalues come back sorted in descending order. Accurate for the tiny
    matrices this package deals with; cost is O(n^3) per sweep.
    """
    a = as_sym(a)
    n = a.shape[0]
    work = a.copy()
    v = np.eye(n)
    scale = np.linalg.norm(work)
    if n > 1 and scale > 0:
        for _ in range(max_sweeps):
            off = np.linalg.norm(work - np.diag(np.diag(work)))
            if off <= 1e-15 * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = work[p, q]
                    if abs(apq) <= 1e-18 * scale:
                        work[p, q] = work[q, p] = 0.0
                        continue
                    theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                    if theta == 0.0:
                        t = 1.0
                    elif abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    # rotate rows/columns p and q
                    wp = work[:, p].copy()
                    wq = work[:, q].copy()
                    work[:, p] = c * wp - s * wq
                    work[:, q] = s * wp + c * wq
                    wp = work[p, :].copy()
                    wq = work[q, :].copy()
                    work[p, :] = c * wp - s * wq
                    work[q, :] = s * wp + c * wq
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
        else:
            off = np.linalg.norm(work - np.diag(np.diag(work)))
            if off > 1e-12 * scale:
                raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps")
    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], v[:, order])


def is_psd(a, tol: float = PSD_TOL) -> bool:
    """True iff ``lambda_min(a) >= -tol * max(1, |lambda_max(a)|)``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    values = eig(a).values
    return bool(values[-1] >= -tol * max(1.0, abs(values[0])))


def min_eigenvalue(a) -> float:
    return float(eig(a).values[-1])


def rank1_factors(x, rank_tol: float = RANK_TOL, psd_tol: float = PSD_TOL) -> list[np.ndarray]:
    """Split a PSD matrix into rank-1 terms ``x = sum_i f_i f_i^T``.

    Keeps eigenpairs with ``lambda_i > rank_tol * lambda_max`` and returns the
    factors ``sqrt(lambda_i) v_i`` in descending eigenvalue order.
    """
    values, vectors = eig(x)
    top = max(values[0], 0.0)
    if values[-1] < -psd_tol * max(1.0, top):
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {values[-1]:.3e})")
    if top == 0.0:
        return []
    keep = values > rank_tol * top
    return [np.sqrt(lam) * vectors[:, i] for i, lam in enumerate(values) if keep[i]]


def reassemble(factors) -> np.ndarray:
    """``sum_i f_i f_i^T``; an empty list gives a 0x0 array."""
    factors = list(factors)
    if not factors:
        return np.zeros((0, 0))
    f = np.column_stack(factors)
    return f @ f.T
