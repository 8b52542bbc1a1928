"""
Six objectives on one feasible region
=====================================

Solve the SDP relaxation for each objective, recover a rank-1 point and
compare with a brute-force grid search.
"""

# %%
import numpy as np

from exactqcqp import instances as inst
from exactqcqp.extract import extract
from exactqcqp.sdp import active_set, solve_relaxation
from exactqcqp.table1 import format_table1, run_table1
from exactqcqp.verify import brute_force_2d

cset, objectives = inst.example41()

# %%
print(format_table1(run_table1()))

# %% [markdown]
# The same thing by hand for one row, showing the pieces.

# %%
instance = inst.QcqpInstance.homogeneous(objectives["q6"], cset)
sol = solve_relaxation(instance)
print("status", sol.status, "eta", round(sol.objective, 8), "iterations", sol.iterations)
print("rank of X:", np.linalg.matrix_rank(sol.X, tol=1e-6), "active:", active_set(instance, sol))
res = extract(instance, sol)
print("case", res.case_path, "u", res.u, "objective", res.objective)

# %%
for key, Q in objectives.items():
    zeta, u = brute_force_2d(inst.QcqpInstance.homogeneous(Q, cset), ((-5, 6), (-5, 6)))
    print(key, "grid minimum", round(zeta, 5), "at", np.round(u, 3))
