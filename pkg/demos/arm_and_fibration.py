"""Two applications: a planar two-link arm, and a circle fibration of the torus.

Run with ``python3 demos/arm_and_fibration.py``.
"""
import numpy as np

from homdist import plan
from homdist.distance import weak_category_sequence
from homdist.scenarios.apps import build_fibration_planner, build_workmap_planner
from homdist.scenarios.runner import tc_torus_planner

# Joint-space plans pushed through the forward kinematics give workspace
# paths between the two hand positions.
arm = build_workmap_planner((1.0, 1.0), tc_torus_planner(2))
for x in ([0, 0, np.pi, 0], [0, 0, 0, np.pi], [0.3, 1.2, 2.0, -0.5]):
    path, j = plan(arm, np.array(x, float))
    print(f"piece {j}: hand {np.round(path.start, 3)} -> {np.round(path.end, 3)}")

# The fibration T^2 -> S^1: a circle path from f(x) to y lifts by moving the
# first joint only.
fib = build_fibration_planner(tc_torus_planner(1))
z = np.array([0.0, 1.0, np.pi])
path, j = plan(fib, z)
lift = fib.pieces[j].lift(z)
print("base path ends at", round(float(path.end[0]), 6), " lift ends at", np.round(lift.end, 6))

# Iterates of z -> z^d on the circle.
for d in (0, 1, 2, -1, 5):
    print(d, weak_category_sequence(d, 10))
