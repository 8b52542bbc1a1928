"""Recover a rank-1 optimum of the QCQP from an optimal SDP solution.

Two routes, depending on whether some constraint is active at ``X``:

* case ``i``: rotate the rank-1 factors of ``X`` pairwise until every factor
  annihilates one active ``B``, then normalize a factor with large ``H``
  weight;
* case ``ii``: no constraint is active, so any eigen-factor already sits in
  the kernel of the dual slack; if the normalized factor breaks a constraint
  we step from ``X`` towards it until a constraint becomes active and fall
  back to case ``i`` (``ii_then_i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instances import QcqpInstance
from .sdp import OPTIMAL, SdpSolution, active_set
from .symmat import RANK_TOL, is_psd, rank1_factors, reassemble

ACT_TOL = 1e-6
FEAS_TOL = 1e-7
SPLIT_ZERO = 1e-13


class ExtractionError(RuntimeError):
    """Extraction could not produce a feasible rank-1 optimum."""


@dataclass(frozen=True)
class Rank1Decomposition:
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(np.asarray(f, dtype=float) for f in self.factors))

    @property
    def r(self) -> int:
        return len(self.factors)

    @classmethod
    def from_matrix(cls, x, rank_tol: float = RANK_TOL) -> "Rank1Decomposition":
        return cls(tuple(rank1_factors(x, rank_tol=rank_tol)))

    def matrix(self) -> np.ndarray:
        return reassemble(self.factors)


@dataclass(frozen=True)
class ExtractionResult:
    X_tilde: np.ndarray
    u: np.ndarray | None
    tau: float
    case_path: str
    objective: float
    split_count: int


@dataclass(frozen=True)
class FallbackNeeded:
    """Case ``ii`` produced an infeasible factor; ``X_hat`` is the blended optimum."""

    X_hat: np.ndarray
    X_tilde: np.ndarray
    theta: float
    newly_active: int


def _form(b: np.ndarray, x: np.ndarray, z: np.ndarray | None = None) -> float:
    return float(x @ b @ (x if z is None else z))


def sturm_split(
    decomp: Rank1Decomposition, B, act_tol: float = ACT_TOL, max_steps: int | None = None
) -> tuple[Rank1Decomposition, int]:
    """Rotate factor pairs until every ``x_i^T B x_i`` vanishes.

    Returns the new decomposition and the number of rotations. Each rotation
    zeroes one factor exactly, so at most ``r - 1`` are needed.
    """
    B = np.asarray(B, dtype=float)
    xs = [f.copy() for f in decomp.factors]
    r = len(xs)
    if r == 0:
        return decomp, 0
    scale = float(np.linalg.norm(B)) * max(1.0, sum(float(x @ x) for x in xs))
    total = sum(_form(B, x) for x in xs)
    if abs(total) > act_tol * max(scale, 1.0):
        raise ExtractionError(f"B . X = {total:.3e} is not zero within act_tol")
    cap = r * r if max_steps is None else max_steps
    zero = SPLIT_ZERO * scale
    count = 0
    while True:
        vals = np.array([_form(B, x) for x in xs])
        i = int(np.argmin(vals))
        j = int(np.argmax(vals))
        if vals[i] >= -zero or vals[j] <= zero:
            break
        if count >= cap:
            raise ExtractionError(f"split did not finish within {cap} rotations")
        a, c = vals[i], vals[j]
        b = _form(B, xs[i], xs[j])
        q = -(b + math.copysign(math.sqrt(b * b - a * c), b if b != 0 else 1.0))
        roots = (q / a, c / q)
        s = min(roots, key=abs)
        norm = math.sqrt(s * s + 1.0)
        xi, xj = xs[i], xs[j]
        xs[i] = (s * xi + xj) / norm
        xs[j] = (-xi + s * xj) / norm
        count += 1
    leftover = max((abs(_form(B, x)) for x in xs), default=0.0)
    if leftover > act_tol * max(scale, 1.0):
        raise ExtractionError(f"no opposite-sign pair left but |B . x x^T| = {leftover:.3e}")
    return Rank1Decomposition(tuple(xs)), count


def _is_last_coordinate_h(H: np.ndarray) -> bool:
    target = np.zeros_like(H)
    target[-1, -1] = 1.0
    return bool(np.array_equal(H, target))


def _normalize(instance: QcqpInstance, x: np.ndarray):
    """Return ``(X_tilde, u, tau)`` for the factor ``x``."""
    H = instance.H
    tau = _form(H, x)
    if _is_last_coordinate_h(H):
        if x[-1] < 0:
            x = -x
        u = x[:-1] / x[-1]
        z = np.concatenate([u, [1.0]])
        return np.outer(z, z), u, tau
    return np.outer(x, x) / tau, None, tau


def _violation(instance: QcqpInstance, Xt: np.ndarray) -> float:
    return max((-float(np.sum(b * Xt)) / (1.0 + float(np.linalg.norm(b))) for b in instance.matrices), default=-math.inf)


def _pick(instance, decomp: Rank1Decomposition, path: str, count: int, require_feasible: bool):
    r = decomp.r
    taus = [_form(instance.H, x) for x in decomp.factors]
    order = sorted(range(r), key=lambda k: -taus[k])
    # pigeonhole: the largest tau is at least the mean (H . X) / r
    bound = sum(taus) / r - 1e-9
    eligible = [k for k in order if taus[k] >= bound]
    if not eligible or taus[order[0]] <= 0:
        raise ExtractionError(f"no factor with tau >= 1/r (max tau {max(taus):.3e}, r={r})")
    candidates = eligible if require_feasible else eligible[:1]
    for k in candidates:
        Xt, u, tau = _normalize(instance, decomp.factors[k])
        if _violation(instance, Xt) <= FEAS_TOL:
            return ExtractionResult(Xt, u, tau, path, float(np.sum(instance.Q * Xt)), count)
    k = candidates[0]
    Xt, u, tau = _normalize(instance, decomp.factors[k])
    return ExtractionResult(Xt, u, tau, path, float(np.sum(instance.Q * Xt)), count)


def extract_case_i(instance: QcqpInstance, sol: SdpSolution, k: int, X=None, path: str = "i") -> ExtractionResult:
    """Split ``X`` against the active constraint ``k`` and normalize one factor."""
    X = sol.X if X is None else np.asarray(X, dtype=float)
    decomp = Rank1Decomposition.from_matrix(X)
    split, count = sturm_split(decomp, instance.matrices[k])
    res = _pick(instance, split, path, count, require_feasible=True)
    worst = _violation(instance, res.X_tilde)
    if worst > FEAS_TOL:
        raise ExtractionError(
            f"extracted point violates a constraint by {worst:.3e}; the pairwise condition may not hold"
        )
    return res


def extract_case_ii(instance: QcqpInstance, sol: SdpSolution):
    """Normalize an eigen-factor of ``X``; ask for a fallback if none is feasible.

    Every factor with ``tau >= (H . X) / r`` is tried in decreasing ``tau``
    order. The fallback blends ``X`` with the largest-``tau`` factor.
    """
    X = sol.X
    decomp = Rank1Decomposition.from_matrix(X)
    res = _pick(instance, decomp, "ii", 0, require_feasible=True)
    Xt = res.X_tilde
    bx = np.array([float(np.sum(b * X)) for b in instance.matrices])
    bt = np.array([float(np.sum(b * Xt)) for b in instance.matrices])
    norms = np.array([1.0 + float(np.linalg.norm(b)) for b in instance.matrices])
    violated = np.flatnonzero(-bt / norms > FEAS_TOL) if bt.size else np.array([], dtype=int)
    if violated.size == 0:
        return res
    thetas = bx[violated] / (bx[violated] - bt[violated])
    pos = int(np.argmin(thetas))
    theta = float(thetas[pos])
    X_hat = (1.0 - theta) * X + theta * Xt
    return FallbackNeeded(0.5 * (X_hat + X_hat.T), Xt, theta, int(violated[pos]))


def extract(instance: QcqpInstance, sol: SdpSolution, act_tol: float = ACT_TOL) -> ExtractionResult:
    """Dispatch between the two cases and return a rank-1 optimum."""
    if sol.status != OPTIMAL:
        raise ExtractionError(f"cannot extract from a solution with status {sol.status!r}")
    if not is_psd(instance.H) and sol.scaled_residuals.max() > 1e-6:
        raise ExtractionError("H is indefinite and the KKT residuals are too large to trust")
    active = active_set(instance, sol.X, act_tol)
    if active:
        return extract_case_i(instance, sol, active[0])
    out = extract_case_ii(instance, sol)
    if isinstance(out, ExtractionResult):
        return out
    again = active_set(instance, out.X_hat, act_tol)
    k = again[0] if again else out.newly_active
    return extract_case_i(instance, sol, k, X=out.X_hat, path="ii_then_i")
