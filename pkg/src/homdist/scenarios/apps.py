"""Planners for applications: a robot arm's work map and a circle fibration."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import ConfigurationError
from ..manifold import Circle, ManifoldSpec, Path, Product, Torus
from ..planner import (
    GeneralizedPlanner, PlannerPiece, compose, forward_kinematics, product_projection,
    projection_first, projection_second,
)


def build_workmap_planner(links, base_planner: GeneralizedPlanner) -> GeneralizedPlanner:
    """Push a TC planner of the joint torus forward through the arm's forward kinematics.

    Sections become workspace paths from ``fk(x0)`` to ``fk(x1)``; the joint
    space path is kept as the piece's ``lift``.
    """
    l1, l2 = (float(v) for v in links)
    base = base_planner
    Q = base.target
    if not Q.is_flat_torus or Q.coord_dim != 2:
        raise ConfigurationError("work-map planners need a TC planner of the 2-torus")
    fk = forward_kinematics(l1, l2, Q)
    f, g = compose(fk, base.f), compose(fk, base.g)
    W = fk.target

    def push(section):
        return lambda x: section(x).map(fk.apply, W)

    pieces = tuple(replace(p, f=f, g=g, section=push(p.section), lift=p.section, label=f"fk*{p.label}")
                   for p in base.pieces)
    prov = {"kind": "Workmap", "links": [l1, l2], "base": base.provenance}
    return GeneralizedPlanner(f, g, pieces, prov, prepare=base.prepare, flows=base.flows,
                              navigation=base.navigation, name=f"workmap({base.name})")


def build_fibration_planner(base_planner: GeneralizedPlanner, X: ManifoldSpec | None = None,
                            index: int = 0) -> GeneralizedPlanner:
    """Planner for ``(f o pi_X, pi_Y)`` on ``X x S^1`` with ``f`` the projection of ``X = T^n`` onto one angle.

    For ``(x, y)`` the base planner's circle path from ``f(x)`` to ``y`` is
    lifted by moving only coordinate ``index`` of ``x``.
    """
    base = base_planner
    X = X or Torus(2)
    if not X.is_flat_torus or X.kind == "Product":
        raise ConfigurationError("the fibration total space must be a Torus(n)")
    if base.source != Product(Circle(), Circle()):
        raise ConfigurationError("the base planner must be a TC planner of the circle")
    Y = Circle()
    fib = product_projection(X, index)
    M = Product(X, Y)
    f = compose(fib, projection_first(M))
    g = projection_second(M)
    n = X.coord_dim

    def base_input(Z):
        Z = np.asarray(Z, dtype=float)
        return np.stack([Z[..., index], Z[..., n]], axis=-1)

    def make(p: PlannerPiece) -> PlannerPiece:
        def predicate(Z):
            return p.contains_many(base_input(np.atleast_2d(Z)))

        def section(z):
            return p.section(base_input(z))

        def lift(z):
            z = np.asarray(z, dtype=float)
            gamma = p.section(base_input(z))
            coords = np.repeat(z[None, :n], len(gamma.t), axis=0)
            coords[:, index] = gamma.coords[:, 0]
            return Path(X, gamma.t, coords)

        return PlannerPiece(f"lift[{p.label}]", f, g, section, predicate=predicate, kind="FibrationLift",
                            params={"base_piece": p.label}, lift=lift)

    def prepare(Z):
        if base.prepare is not None:
            base.prepare(base_input(np.atleast_2d(Z)))

    prov = {"kind": "Fibration", "fiber_index": int(index), "total_space": str(X), "base": base.provenance}
    return GeneralizedPlanner(f, g, tuple(make(p) for p in base.pieces), prov, prepare=prepare,
                              flows=base.flows, navigation=base.navigation, name=f"fibration({base.name})")
