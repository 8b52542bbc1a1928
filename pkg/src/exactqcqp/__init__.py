"""Exact SDP relaxations of nonconvex QCQPs with pairwise PSD structure.

Build constraint families, check the pairwise conditions, solve the SDP
relaxation with a small interior-point method and recover a rank-1 optimum.
"""

from .constraints import (
    Constraint,
    ConstraintSet,
    conjugate,
    disk,
    evaluate,
    hyperbola,
    is_feasible,
    line,
    parabola,
    rotation,
    scaling,
    translation,
)
from .extract import ExtractionError, ExtractionResult, FallbackNeeded, Rank1Decomposition, extract, sturm_split
from .instances import QcqpInstance, example41
from .sdp import KktResiduals, SdpSolution, SolverOptions, active_set, kkt_residuals, solve_relaxation
from .verify import (
    ConditionReport,
    brute_force_2d,
    falsify_condition_Bprime,
    verify_condition_Cprime,
    verify_condition_D,
    verify_condition_Dprime,
)

__version__ = "0.1.0"
