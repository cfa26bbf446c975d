"""Planning on the 2-sphere around a cut locus.

Run with ``python3 demos/sphere_cut_locus.py``.
"""
import numpy as np

from homdist import check_cutlocus_inequality, continuity_audit, plan
from homdist.cutlocus import GridSpec, cut_locus_analytic, detect_separation_points
from homdist.manifold import Sphere, Torus
from homdist.scenarios.config import load_config
from homdist.scenarios.runner import build_planner
from homdist.submanifold import SinglePoint

# The cut locus of the north pole is the south pole, and a grid search for
# points with two nearest routes to N finds only points near it.
S2 = Sphere(2)
N = SinglePoint(S2, [0, 0, 1])
print(cut_locus_analytic(S2, N).describe())
P = detect_separation_points(S2, N, GridSpec(resolution=40))
print(len(P), "separation points, max distance to the south pole:",
      float(np.max(S2.dist(P, [0, 0, -1]))) if len(P) else None)

# On the flat torus the cut locus of a point is a wedge of two circles.
T2 = Torus(2)
P = detect_separation_points(T2, SinglePoint(T2, [0.0, 0.0]), GridSpec(resolution=100))
print("torus: detected", len(P), "points, all with a coordinate at pi:",
      bool(np.all(np.min(np.abs(P - np.pi), axis=1) < 0.05)))

# The TC planner of S^2: one piece near the diagonal, two on the antipodal set.
pl, extras = build_planner(load_config("tc_sphere2_cutlocus"))
p = np.array([0.6, 0.0, 0.8])
for x in (np.concatenate([p, p]), np.concatenate([p, -p]), np.concatenate([p, [0, 1.0, 0]])):
    path, j = plan(pl, x)
    print(f"piece {j}, length {path.length():.3f}")
print(check_cutlocus_inequality(pl, reference=("TC", "S2")).extras["arithmetic"])

# A single antipodal piece cannot work: its section jumps near the excluded axis.
bad = continuity_audit(extras["attempt"], 20, seed=0, focus=extras["focus"], focus_directions=16)
good = continuity_audit(pl, 20, seed=0, focus=extras["focus"], focus_directions=16)
print("discontinuous pairs: one-piece attempt", len(bad.violations), " planner", len(good.violations))
