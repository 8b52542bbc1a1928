"""
Constraint families and the pairwise PSD test
=============================================

Build the generator families, check that every weighted pair of constraint
matrices sums to a PSD matrix, and draw the restricted zones as SVG.
"""

# %%
from pathlib import Path

import numpy as np

from exactqcqp import instances as inst
from exactqcqp.constraints import evaluate, is_feasible
from exactqcqp.render import RenderSpec, render_svg
from exactqcqp.verify import falsify_condition_Bprime, verify_condition_Cprime, verify_condition_D

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

# %% [markdown]
# Seven small disks on a ring plus one big disk. The feasible region is
# what is left inside the big disk once the small ones are cut out.

# %%
ring = inst.instance_disk_ring(0.5)
print(len(ring), "constraints, weights", ring.alphas)
print("origin feasible?", is_feasible(ring, (0, 0)))
print("value of B0 at its centre:", evaluate(ring[0], (1, 0)))

for name, s in [
    ("disk ring", ring),
    ("hyperbola fan", inst.instance_hyperbola_fan(5, 2.0, (-1.0, 0.0))),
    ("parabola star", inst.instance_parabola_star(7, 2.0)),
    ("hyperbola family", inst.family_hyperbola([(2, 1), (1, 1), (0, 1), (-1, 1), (-2, 1)])),
    ("mixed", inst.convex_combine(ring, inst.instance_parabola_star(7, 2.0), 0.09)),
]:
    print(f"{name:17s}", verify_condition_D(s).summary(), "|", verify_condition_Cprime(s).summary())

# %% [markdown]
# The zone-overlap check is only a sampling search: a clean run is evidence,
# not a proof.

# %%
print(falsify_condition_Bprime(ring, samples=50_000).summary())

# %%
spec = RenderSpec(bbox=((-2, 2), (-2, 2)), resolution=300)
(out / "disk_ring.svg").write_text(render_svg(ring, spec))
(out / "strip.svg").write_text(render_svg(inst.instance_strip(), spec))
print("wrote", sorted(p.name for p in out.glob("*.svg")))

# %% [markdown]
# A quick numeric look: the smallest eigenvalue of each weighted pair sum.

# %%
w, mats = ring.weights(), ring.matrices
worst = min(np.linalg.eigvalsh(w[i] * mats[i] + w[j] * mats[j])[0] for i in range(8) for j in range(i + 1, 8))
print("smallest pair eigenvalue:", worst)
