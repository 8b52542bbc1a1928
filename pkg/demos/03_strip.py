"""
Same region, different description
==================================

A strip written as two half-planes lets the relaxation run off to minus
infinity; written as one quadratic constraint the relaxation is exact.
"""

# %%
from exactqcqp import instances as inst
from exactqcqp.extract import extract
from exactqcqp.sdp import solve_relaxation

Q = inst.strip_objective()
two = inst.QcqpInstance.homogeneous(Q, inst.instance_strip())
one = inst.QcqpInstance.homogeneous(Q, inst.instance_strip_single())

# %%
sol2 = solve_relaxation(two)
print("two half-planes:", sol2.status, "after", sol2.iterations, "iterations")

sol1 = solve_relaxation(one)
res = extract(one, sol1)
print("single quadratic:", sol1.status, "eta =", round(sol1.objective, 6))
print("recovered u =", res.u, "with u1 + u2 =", res.u.sum())
