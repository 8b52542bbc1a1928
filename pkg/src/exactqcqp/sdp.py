"""Primal-dual interior-point solver for the SDP relaxation.

The relaxation is::

    minimize    Q . X
    subject to  H . X = 1
                B_k . X >= 0      k = 1..m
                X PSD

with dual ``maximize t`` subject to ``Q - t H - sum_k y_k B_k = Y``,
``Y PSD`` and ``y >= 0``. Inequalities carry explicit slacks ``s_k`` and the
method is an infeasible-start path-following scheme with the HKM search
direction and Mehrotra's predictor-corrector step. Everything is dense; the
Schur complement has size ``m + 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .instances import QcqpInstance
from .symmat import symmetrize

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    unbounded_threshold: float = 1e8
    infeasible_threshold: float = 1e8
    ray_tol: float = 1e-4


@dataclass(frozen=True)
class KktResiduals:
    primal_eq: float
    primal_ineq: float
    dual: float
    comp_y: float
    comp_Y: float

    def as_dict(self) -> dict:
        return {
            "primal_eq": self.primal_eq,
            "primal_ineq": self.primal_ineq,
            "dual": self.dual,
            "comp_y": self.comp_y,
            "comp_Y": self.comp_Y,
        }

    def max(self) -> float:
        return max(self.as_dict().values())


@dataclass
class SdpSolution:
    status: str
    X: np.ndarray
    t: float
    y: np.ndarray
    Y: np.ndarray
    objective: float
    residuals: KktResiduals
    scaled_residuals: KktResiduals
    iterations: int
    history: list = field(default_factory=list, repr=False)

    @property
    def dual_objective(self) -> float:
        return self.t


def kkt_residuals(instance: QcqpInstance, X, t, y, Y) -> KktResiduals:
    """Recompute every KKT residual from scratch (no solver state involved)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape != instance.Q.shape or Y.shape != instance.Q.shape:
        raise ValueError("dimension mismatch")
    bx = np.array([np.sum(b * X) for b in instance.matrices])
    stationarity = instance.Q - t * instance.H - Y
    for yk, b in zip(y, instance.matrices):
        stationarity = stationarity - yk * b
    return KktResiduals(
        primal_eq=abs(float(np.sum(instance.H * X)) - 1.0),
        primal_ineq=max(0.0, -float(bx.min())) if bx.size else 0.0,
        dual=float(np.linalg.norm(stationarity)),
        comp_y=float(np.max(np.abs(y * bx))) if bx.size else 0.0,
        comp_Y=abs(float(np.sum(Y * X))),
    )


def scaled_kkt_residuals(instance: QcqpInstance, X, t, y, Y) -> KktResiduals:
    """KKT residuals divided by the natural magnitude of each quantity."""
    raw = kkt_residuals(instance, X, t, y, Y)
    nx = float(np.linalg.norm(X))
    nb = max((float(np.linalg.norm(b)) for b in instance.matrices), default=0.0)
    pobj = float(np.sum(instance.Q * X))
    objscale = 1.0 + abs(pobj) + abs(t)
    dscale = 1.0 + float(np.linalg.norm(instance.Q)) + abs(t) * float(np.linalg.norm(instance.H))
    dscale += sum(abs(yk) * float(np.linalg.norm(b)) for yk, b in zip(y, instance.matrices))
    return KktResiduals(
        primal_eq=raw.primal_eq / (1.0 + float(np.linalg.norm(instance.H)) * nx),
        primal_ineq=raw.primal_ineq / (1.0 + nb * nx),
        dual=raw.dual / dscale,
        comp_y=raw.comp_y / objscale,
        comp_Y=raw.comp_Y / objscale,
    )


def active_set(instance: QcqpInstance, X, act_tol: float = 1e-6) -> list[int]:
    """Indices ``k`` with ``|B_k . X| <= act_tol (1 + ||B_k|| ||X||)``."""
    X = X.X if isinstance(X, SdpSolution) else np.asarray(X, dtype=float)
    nx = float(np.linalg.norm(X))
    out = []
    for k, b in enumerate(instance.matrices):
        if abs(float(np.sum(b * X))) <= act_tol * (1.0 + float(np.linalg.norm(b)) * nx):
            out.append(k)
    return out


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest ``a`` with ``x + a dx`` PSD (``x`` positive definite)."""
    try:
        L = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    w = sla.solve_triangular(L, dx, lower=True)
    w = sla.solve_triangular(L, w.T, lower=True)
    lam = float(np.linalg.eigvalsh(symmetrize(w))[0])
    return math.inf if lam >= 0 else -1.0 / lam


def _max_step_vec(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not neg.any():
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def _solve_schur(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        c = sla.cho_factor(M, lower=True, check_finite=False)
        return sla.cho_solve(c, rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        return np.linalg.lstsq(M, rhs, rcond=None)[0]


def solve_relaxation(instance: QcqpInstance, opts: SolverOptions | None = None) -> SdpSolution:
    """Solve the SDP relaxation of ``instance``.

    ``status`` is ``optimal`` when every scaled KKT residual is below
    ``opts.tol``; ``unbounded`` when a primal iterate drives the objective
    below ``-unbounded_threshold`` or exhibits an improving recession ray;
    ``infeasible`` when the dual objective diverges upward; ``max_iter``
    otherwise.
    """
    opts = opts or SolverOptions()
    n, m = instance.n, instance.m
    Q = np.array(instance.Q)
    H = np.array(instance.H)
    A = np.stack([H] + [np.array(b) for b in instance.matrices])  # (m+1, n, n)
    b = np.zeros(m + 1)
    b[0] = 1.0
    qnorm = float(np.linalg.norm(Q))
    hnorm = float(np.linalg.norm(H))
    bnorms = np.array([float(np.linalg.norm(a)) for a in A[1:]])

    htrace = float(np.trace(H))
    X = np.eye(n) / htrace if htrace > 1e-8 else np.eye(n)
    s = np.ones(m)
    t = 0.0
    y = np.ones(m)
    Y = np.eye(n)
    nu = n + m

    history = []
    status = MAX_ITER
    it = 0
    for it in range(opts.max_iter + 1):
        AX = np.einsum("kij,ij->k", A, X)
        rp = b - AX
        rp[1:] += s
        Rd = Q - t * H - np.einsum("k,kij->ij", y, A[1:]) - Y if m else Q - t * H - Y
        Rd = symmetrize(Rd)
        pobj = float(np.sum(Q * X))
        dobj = t
        mu = (float(np.sum(X * Y)) + float(s @ y)) / nu

        nx = float(np.linalg.norm(X))
        pres = max(abs(rp[0]) / (1.0 + hnorm * nx), float(np.max(np.abs(rp[1:]) / (1.0 + bnorms * nx))) if m else 0.0)
        dscale = 1.0 + qnorm + abs(t) * hnorm + float(np.sum(np.abs(y) * bnorms))
        dres = float(np.linalg.norm(Rd)) / dscale
        objscale = 1.0 + abs(pobj) + abs(dobj)
        comp = max(abs(float(np.sum(X * Y))), float(np.max(s * y)) if m else 0.0) / objscale
        gap = abs(pobj - dobj) / objscale
        history.append({"iter": it, "pobj": pobj, "dobj": dobj, "pres": pres, "dres": dres, "gap": gap, "mu": mu})
        log.debug("it %3d pobj %+.6e dobj %+.6e pres %.1e dres %.1e gap %.1e", it, pobj, dobj, pres, dres, gap)

        if max(pres, dres, comp, gap) <= opts.tol:
            status = OPTIMAL
            break
        if pres <= 1e-6 and pobj < -opts.unbounded_threshold * (1.0 + qnorm):
            status = UNBOUNDED
            break
        if nx > 1e6 and _is_improving_ray(Q, H, A[1:], X / nx, opts.ray_tol, qnorm):
            status = UNBOUNDED
            break
        if dres <= 1e-6 and dobj > opts.infeasible_threshold * (1.0 + qnorm):
            status = INFEASIBLE
            break
        if it == opts.max_iter:
            break

        try:
            Yi = np.linalg.inv(Y)
        except np.linalg.LinAlgError:
            break
        Yi = symmetrize(Yi)
        P = np.einsum("ab,kbc,cd->kad", X, A, Yi)  # X A_k Y^-1
        M = np.einsum("iab,jba->ij", A, P)
        M = symmetrize(M)
        if m:
            M[1:, 1:] += np.diag(s / y)
        XRdYi = X @ Rd @ Yi

        def direction(sigma_mu, corr_mat, corr_vec):
            G = sigma_mu * Yi - X - XRdYi - corr_mat
            rhs = rp - np.einsum("kij,ji->k", A, G)
            lp = (sigma_mu - s * y - corr_vec) / y if m else np.zeros(0)
            rhs[1:] += lp
            dw = _solve_schur(M, rhs)
            dX = symmetrize(G + np.einsum("k,kij->ij", dw, P))
            dY = symmetrize(Rd - np.einsum("k,kij->ij", dw, A))
            dy = dw[1:]
            ds = lp - (s / y) * dy if m else np.zeros(0)
            return dX, ds, dw[0], dy, dY

        # predictor
        dXa, dsa, dta, dya, dYa = direction(0.0, 0.0, 0.0)
        ap = min(1.0, _max_step(X, dXa), _max_step_vec(s, dsa))
        ad = min(1.0, _max_step(Y, dYa), _max_step_vec(y, dya))
        mu_aff = (
            float(np.sum((X + ap * dXa) * (Y + ad * dYa))) + float((s + ap * dsa) @ (y + ad * dya))
        ) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

        # corrector
        dX, ds, dt, dy, dY = direction(sigma * mu, dXa @ dYa @ Yi, dsa * dya)
        ap = _max_step(X, dX)
        ap = min(ap, _max_step_vec(s, ds))
        ad = _max_step(Y, dY)
        ad = min(ad, _max_step_vec(y, dy))
        gamma = 0.9 + 0.09 * min(min(ap, 1.0), min(ad, 1.0))
        ap = min(1.0, gamma * ap)
        ad = min(1.0, gamma * ad)
        if ap < 1e-14 and ad < 1e-14:
            break
        X = symmetrize(X + ap * dX)
        s = s + ap * ds
        t = t + ad * dt
        y = y + ad * dy
        Y = symmetrize(Y + ad * dY)

    raw = kkt_residuals(instance, X, t, y, Y)
    scaled = scaled_kkt_residuals(instance, X, t, y, Y)
    return SdpSolution(
        status=status,
        X=X,
        t=float(t),
        y=y,
        Y=Y,
        objective=float(np.sum(Q * X)),
        residuals=raw,
        scaled_residuals=scaled,
        iterations=it,
        history=history,
    )


def _is_improving_ray(Q, H, Bs, D, tol, qnorm) -> bool:
    """``D`` (unit norm, PSD) keeps every constraint and decreases the objective."""
    if float(np.sum(Q * D)) >= -tol * (1.0 + qnorm):
        return False
    if abs(float(np.sum(H * D))) > tol:
        return False
    return all(float(np.sum(b * D)) >= -tol * (1.0 + float(np.linalg.norm(b))) for b in Bs)
