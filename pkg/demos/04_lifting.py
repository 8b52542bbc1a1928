"""
Growing families by lifting
===========================

Combine two families through a matrix L to get a larger family that still
passes the pairwise test, then solve a 6x6 instance with H = I.
"""

# %%
import numpy as np

from exactqcqp import instances as inst
from exactqcqp.extract import extract
from exactqcqp.sdp import solve_relaxation
from exactqcqp.verify import verify_condition_D

a = inst.instance_disk_ring(0.5)
b = inst.instance_disk_ring(1 / 3)

# %% [markdown]
# The splitting matrix puts the two copies on separate variables but shares
# the homogenizing coordinate.

# %%
s5 = inst.lift(a, b, inst.splitting_matrix(0.5, 3, 3))
print("split:", s5.n, "x", s5.n, verify_condition_D(s5).summary())

pad = inst.dummy_pad(inst.scalar_set([-0.25]), len(s5) - 1)
L = np.zeros((6, 6))
L[:5, :5] = np.sqrt(0.5) * np.eye(5)
L[5, 5] = np.sqrt(0.5)
s6 = inst.lift(s5, pad, L)
print("padded:", s6.n, "x", s6.n, verify_condition_D(s6).summary())

# %% [markdown]
# Mismatched sizes are refused with a pointer to padding.

# %%
try:
    inst.lift(a, inst.instance_strip(), np.eye(5))
except ValueError as exc:
    print("refused:", exc)

# %%
rng = np.random.default_rng(0)
for _ in range(3):
    G = rng.uniform(-2, 2, (6, 6))
    instance = inst.QcqpInstance((G + G.T) / 2, np.eye(6), s6)
    sol = solve_relaxation(instance)
    res = extract(instance, sol)
    print(f"{sol.status}: eta {sol.objective:+.8f}, rank-1 objective {res.objective:+.8f}, case {res.case_path}")
