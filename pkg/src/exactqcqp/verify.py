"""Checks on constraint families and a brute-force oracle for 2-D problems.

``verify_condition_D``, ``verify_condition_Dprime`` and
``verify_condition_Cprime`` are decidable eigenvalue tests. The restricted-
zone overlap test (``falsify_condition_Bprime``) is sampling based and can
only ever report that it found no counterexample; a pass is not a proof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .constraints import ConstraintSet, evaluate_many, feasible_mask, FEAS_TOL
from .symmat import PSD_TOL, eig

STRICT_TOL = 1e-7
DPRIME_GRID = 720

D = "D"
DPRIME = "Dprime"
CPRIME = "Cprime"
BPRIME_FALSIFIER = "Bprime-falsifier"


@dataclass
class ConditionReport:
    condition: str
    passed: bool
    witnesses: list = field(default_factory=list)
    min_margin: float = math.inf
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "min_margin": None if not math.isfinite(self.min_margin) else self.min_margin,
            "details": self.details,
        }

    def summary(self) -> str:
        if self.condition == BPRIME_FALSIFIER:
            verdict = "no counterexample" if self.passed else "counterexample found"
        else:
            verdict = "pass" if self.passed else "FAIL"
        text = f"{self.condition}: {verdict}"
        if math.isfinite(self.min_margin):
            text += f" (min margin {self.min_margin:.3e})"
        return text


def _psd_margin(values: np.ndarray) -> float:
    """``lambda_min / max(1, |lambda_max|)``; PSD within tol iff >= -tol."""
    return float(values[-1] / max(1.0, abs(values[0])))


def verify_condition_D(cset: ConstraintSet, psd_tol: float = PSD_TOL) -> ConditionReport:
    """Every weighted pair ``alpha_A A + alpha_B B`` is PSD."""
    w = cset.weights()
    mats = cset.matrices
    witnesses = []
    margin = math.inf
    for i, j in itertools.combinations(range(len(mats)), 2):
        values = eig(w[i] * mats[i] + w[j] * mats[j]).values
        margin = min(margin, float(values[-1]))
        if _psd_margin(values) < -psd_tol:
            witnesses.append({"pair": [i, j], "min_eigenvalue": float(values[-1])})
    details = {"alphas": list(w), "assumed_unit_alphas": cset.alphas is None}
    return ConditionReport(D, not witnesses, witnesses, margin, details)


def verify_condition_Dprime(
    cset: ConstraintSet, grid: int = DPRIME_GRID, psd_tol: float = PSD_TOL
) -> ConditionReport:
    """Every pair has *some* nonzero ``(alpha, beta)`` making ``alpha A + beta B`` PSD.

    Scans ``(cos phi, sin phi)`` on ``grid`` equally spaced angles; the
    direction of the stored alphas is always tried first.
    """
    if grid < 3:
        raise ValueError("grid must be at least 3")
    mats = cset.matrices
    w = cset.weights()
    angles = 2.0 * np.pi * np.arange(grid) / grid
    witnesses = []
    margin = math.inf
    for i, j in itertools.combinations(range(len(mats)), 2):
        candidates = itertools.chain([math.atan2(w[j], w[i])], angles)
        best = -math.inf
        for phi in candidates:
            values = eig(math.cos(phi) * mats[i] + math.sin(phi) * mats[j]).values
            score = _psd_margin(values)
            best = max(best, score)
            if score >= -psd_tol:
                break
        margin = min(margin, best)
        if best < -psd_tol:
            witnesses.append({"pair": [i, j], "best_scaled_min_eigenvalue": best})
    return ConditionReport(DPRIME, not witnesses, witnesses, margin, {"grid": grid})


def verify_condition_Cprime(cset: ConstraintSet, psd_tol: float = PSD_TOL) -> ConditionReport:
    """No constraint matrix is PSD, i.e. every restricted zone has an interior."""
    witnesses = []
    margin = math.inf
    for k, m in enumerate(cset.matrices):
        values = eig(m).values
        margin = min(margin, -float(values[-1]))
        if _psd_margin(values) >= -psd_tol:
            witnesses.append({"index": k, "min_eigenvalue": float(values[-1])})
    return ConditionReport(CPRIME, not witnesses, witnesses, margin)


def sample_points(bbox, samples: int, seed: int = 0) -> np.ndarray:
    """Half the budget on a uniform grid, the rest from a scrambled Halton sequence."""
    lo, hi = _bbox_bounds(bbox)
    d = lo.shape[0]
    per_axis = max(2, int((samples / 2) ** (1.0 / d)))
    axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    rest = max(samples - grid.shape[0], 0)
    if rest:
        halton = qmc.Halton(d, scramble=True, seed=seed).random(rest)
        grid = np.vstack([grid, qmc.scale(halton, lo, hi)])
    return grid


def _bbox_bounds(bbox) -> tuple[np.ndarray, np.ndarray]:
    """Accept ``((lo1, hi1), (lo2, hi2), ...)``."""
    arr = np.asarray(bbox, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or np.any(arr[:, 1] <= arr[:, 0]):
        raise ValueError("bbox must be a sequence of (lo, hi) pairs with lo < hi")
    return arr[:, 0].copy(), arr[:, 1].copy()


def falsify_condition_Bprime(
    cset: ConstraintSet,
    bbox=((-6.0, 6.0), (-6.0, 6.0)),
    samples: int = 100_000,
    seed: int = 0,
    strict_tol: float = STRICT_TOL,
) -> ConditionReport:
    """Search for a point strictly inside one restricted zone and inside another.

    A pass means the search came up empty, not that none exists.
    """
    mats = cset.matrices
    details = {"samples": samples, "seed": seed, "bbox": np.asarray(bbox, dtype=float).tolist(), "proof": False}
    if len(mats) < 2:
        return ConditionReport(BPRIME_FALSIFIER, True, [], math.inf, details)
    pts = sample_points(bbox, samples, seed)
    if pts.shape[1] != cset.n - 1:
        raise ValueError("bbox dimension does not match the constraint size")
    vals = np.array([evaluate_many(m, pts) for m in mats])
    strict = vals < -strict_tol
    witnesses = []
    margin = math.inf
    for i, j in itertools.permutations(range(len(mats)), 2):
        inside = strict[i]
        if not inside.any():
            continue
        margin = min(margin, float(vals[j][inside].min()))
        hits = np.flatnonzero(inside & (vals[j] <= 0.0))
        if hits.size:
            k = hits[np.argmin(vals[i][hits])]
            witnesses.append(
                {"pair": [i, j], "point": pts[k].tolist(), "values": [float(vals[i][k]), float(vals[j][k])]}
            )
    return ConditionReport(BPRIME_FALSIFIER, not witnesses, witnesses, margin, details)


def brute_force_2d(
    instance,
    bbox=((-5.0, 5.0), (-5.0, 5.0)),
    coarse: int = 401,
    refine_levels: int = 3,
    keep: int = 50,
    shrink: float = 0.1,
    feas_tol: float = FEAS_TOL,
):
    """Grid search for ``min (u;1)^T Q (u;1)`` over the feasible region of a
    3x3 instance, refined around the ``keep`` best points.

    Returns ``(value, point)``; ``(inf, None)`` when no grid point is feasible.
    """
    if instance.n != 3:
        raise ValueError("brute_force_2d needs a 3x3 instance")
    if coarse < 51:
        raise ValueError("coarse grid must have at least 51 points per axis")
    lo, hi = _bbox_bounds(bbox)
    cset = instance.constraints
    q = instance.Q

    xs = np.linspace(lo[0], hi[0], coarse)
    ys = np.linspace(lo[1], hi[1], coarse)
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    step = (hi - lo) / (coarse - 1)

    best_pts, best_vals = _best_feasible(cset, q, pts, keep, feas_tol)
    if best_pts.shape[0] == 0:
        return math.inf, None

    sub = int(round(2.0 / shrink)) + 1
    offsets = np.linspace(-1.0, 1.0, sub)
    local = np.stack(np.meshgrid(offsets, offsets, indexing="ij"), axis=-1).reshape(-1, 2)
    for _ in range(refine_levels):
        cand = (best_pts[:, None, :] + local[None, :, :] * step).reshape(-1, 2)
        cand = np.clip(cand, lo, hi)
        cand = np.vstack([cand, best_pts])
        best_pts, best_vals = _best_feasible(cset, q, cand, keep, feas_tol)
        step = step * shrink
    return float(best_vals[0]), best_pts[0].copy()


def _best_feasible(cset, q, pts, keep, feas_tol):
    mask = feasible_mask(cset, pts, feas_tol)
    pts = pts[mask]
    if pts.shape[0] == 0:
        return pts, np.empty(0)
    vals = evaluate_many(q, pts)
    pts, idx = np.unique(pts, axis=0, return_index=True)
    vals = vals[idx]
    order = np.lexsort((pts[:, 1], pts[:, 0], vals))[:keep]
    return pts[order], vals[order]
