"""A motion planner on the 2-torus built from a navigation function.

Run with ``python3 demos/torus_planner.py``.
"""
import numpy as np

from homdist import check_morse_bott_inequality, coverage_audit, plan
from homdist.morse import audit_critical_levels, torus_cosine
from homdist.scenarios.runner import tc_torus_planner

# The navigation function sum_i (1 - cos(x_i - y_i)) on T^2 x T^2 has three
# critical levels.  Each level is a disjoint union of shifted diagonals.
phi = torus_cosine(2)
for lv in phi.levels:
    print(f"level {lv.value}: {len(lv.components)} component(s), index {lv.indices[0]}")
print(audit_critical_levels(phi, samples=200)["critical_values"])

# One piece per level.  A pair (x, y) is routed by following the flow of the
# navigation function down to a level and translating there.
pl = tc_torus_planner(2)
print([p["label"] for p in pl.describe()["pieces"]])

rng = np.random.default_rng(0)
for x in pl.source.sample(rng, 5):
    path, j = plan(pl, x)
    print(f"piece {j}: {np.round(path.start, 3)} -> {np.round(path.end, 3)}  ({len(path.t)} samples)")

# Coverage on a grid, then the bound with its arithmetic.
cov = coverage_audit(pl, 10_000)
print("coverage ok:", cov.ok, cov.per_piece)
rep = check_morse_bott_inequality(pl, reference=("TC", "T2"))
print(f"D(p1, p2) <= {rep.upper_bound}   {rep.extras['arithmetic']}   reference {rep.reference_value}")
