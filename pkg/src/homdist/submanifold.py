"""Closed submanifolds of catalog manifolds with nearest-point projections.

A :class:`SubmanifoldSpec` knows its distance function, a nearest-point
projection (the retraction used for tubes), its dimension, and how to sample
itself on a grid.  All methods broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .manifold import (
    CIRCLE, PRODUCT, REAL_PROJECTIVE, SPHERE, TORUS,
    ManifoldSpec, wrap_angle, wrap_diff,
)

SINGLE_POINT = "SinglePoint"
DIAGONAL = "Diagonal"
SUBTORUS = "Subtorus"
ANTIPODAL_GRAPH = "AntipodalGraph"
CUSTOM = "Custom"

_SQRT2 = np.sqrt(2.0)


def injectivity_radius(M: ManifoldSpec) -> float:
    if M.kind in (SPHERE, CIRCLE, TORUS):
        return float(np.pi)
    if M.kind == REAL_PROJECTIVE:
        return float(np.pi / 2)
    if M.kind == PRODUCT:
        return min(injectivity_radius(f) for f in M.factors)
    return float("inf")


def _square_factor(M: ManifoldSpec) -> ManifoldSpec:
    if M.kind != PRODUCT or len(M.factors) != 2 or M.factors[0] != M.factors[1]:
        raise ConfigurationError(f"expected an ambient of the form F x F, got {M}")
    return M.factors[0]


@dataclass(frozen=True, eq=False)
class SubmanifoldSpec:
    ambient: ManifoldSpec
    kind: str
    point: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None
    fixed: tuple = ()
    label: str = ""
    custom_distance: Optional[Callable] = None
    custom_project: Optional[Callable] = None
    custom_sampler: Optional[Callable] = None
    custom_dimension: int = 0
    margin: Optional[float] = None
    params: dict = field(default_factory=dict)

    # -- geometry ---------------------------------------------------------
    def project(self, X):
        X = np.asarray(X, dtype=float)
        M = self.ambient
        k = self.kind
        if k == SINGLE_POINT:
            return np.broadcast_to(self.point, X.shape).copy()
        if k == DIAGONAL:
            F = _square_factor(M)
            a, b = X[..., :F.coord_dim], X[..., F.coord_dim:]
            off = 0.0 if self.offset is None else self.offset
            b_shift = F.canonical(b + off) if self.offset is not None else b
            m = F.exp(a, 0.5 * F.log(a, b_shift))
            mb = F.canonical(m - off) if self.offset is not None else m
            return np.concatenate([m, mb], axis=-1)
        if k == ANTIPODAL_GRAPH:
            F = _square_factor(M)
            a, b = X[..., :F.coord_dim], X[..., F.coord_dim:]
            m = F.exp(a, 0.5 * F.log(a, -b))
            return np.concatenate([m, -m], axis=-1)
        if k == SUBTORUS:
            Y = X.copy()
            for i, v in self.fixed:
                Y[..., i] = v
            return Y
        return np.asarray(self.custom_project(X), dtype=float)

    def distance(self, X):
        X = np.asarray(X, dtype=float)
        M = self.ambient
        k = self.kind
        if k == SINGLE_POINT:
            return M.dist(X, self.point)
        if k == DIAGONAL:
            F = _square_factor(M)
            a, b = X[..., :F.coord_dim], X[..., F.coord_dim:]
            if self.offset is not None:
                b = F.canonical(b + self.offset)
            return F.dist(a, b) / _SQRT2
        if k == ANTIPODAL_GRAPH:
            F = _square_factor(M)
            return F.dist(X[..., :F.coord_dim], -X[..., F.coord_dim:]) / _SQRT2
        if k == SUBTORUS:
            idx = [i for i, _ in self.fixed]
            vals = np.array([v for _, v in self.fixed])
            return np.linalg.norm(wrap_diff(X[..., idx] - vals), axis=-1)
        if self.custom_distance is not None:
            return np.asarray(self.custom_distance(X), dtype=float)
        return M.dist(X, self.project(X))

    def contains(self, X, tol: float = 1e-9):
        return self.distance(X) <= tol

    @property
    def dimension(self) -> int:
        k = self.kind
        if k == SINGLE_POINT:
            return 0
        if k in (DIAGONAL, ANTIPODAL_GRAPH):
            return _square_factor(self.ambient).dimension
        if k == SUBTORUS:
            return self.ambient.dimension - len(self.fixed)
        return int(self.custom_dimension)

    @property
    def injectivity_margin(self) -> float:
        """Largest tube radius on which the projection is single valued."""
        if self.margin is not None:
            return float(self.margin)
        k = self.kind
        if k in (DIAGONAL, ANTIPODAL_GRAPH):
            return injectivity_radius(_square_factor(self.ambient)) / _SQRT2
        return injectivity_radius(self.ambient)

    def sample(self, resolution: int = 64):
        """Grid sample of the submanifold itself."""
        M = self.ambient
        k = self.kind
        if k == SINGLE_POINT:
            return self.point[None, :].copy()
        if k in (DIAGONAL, ANTIPODAL_GRAPH):
            F = _square_factor(M)
            a = F.grid(resolution)
            if k == ANTIPODAL_GRAPH:
                b = -a
            elif self.offset is not None:
                b = F.canonical(a - self.offset)
            else:
                b = a
            return np.concatenate([a, b], axis=-1)
        if k == SUBTORUS:
            free = [i for i in range(M.coord_dim) if i not in dict(self.fixed)]
            axis = 2 * np.pi * np.arange(resolution) / resolution
            mesh = np.meshgrid(*([axis] * len(free)), indexing="ij")
            Y = np.zeros((mesh[0].size if free else 1, M.coord_dim))
            for j, i in enumerate(free):
                Y[:, i] = mesh[j].ravel()
            for i, v in self.fixed:
                Y[:, i] = v
            return Y
        if self.custom_sampler is None:
            raise ConfigurationError(f"custom submanifold {self.label!r} has no sampler")
        return np.atleast_2d(np.asarray(self.custom_sampler(resolution), dtype=float))

    def describe(self) -> dict:
        d = {"kind": self.kind, "ambient": str(self.ambient), "dimension": self.dimension}
        if self.label:
            d["label"] = self.label
        if self.point is not None:
            d["point"] = [float(c) for c in self.point]
        if self.offset is not None:
            d["offset"] = [float(c) for c in self.offset]
        if self.fixed:
            d["fixed"] = {str(i): float(v) for i, v in self.fixed}
        d.update(self.params)
        return d


def SinglePoint(ambient: ManifoldSpec, p, label: str = "") -> SubmanifoldSpec:
    p = ambient.canonical(np.asarray(p, dtype=float))
    if ambient.residual(p) > 1e-9:
        raise ConfigurationError(f"{p} is not a point of {ambient}")
    return SubmanifoldSpec(ambient, SINGLE_POINT, point=p, label=label)


def Diagonal(ambient: ManifoldSpec, offset=None, label: str = "") -> SubmanifoldSpec:
    """Diagonal of ``F x F``; with ``offset`` (tori only) the graph ``{(a, a - offset)}``."""
    F = _square_factor(ambient)
    if offset is not None:
        if not F.is_flat_torus:
            raise ConfigurationError("shifted diagonals are only defined on tori")
        offset = wrap_angle(np.asarray(offset, dtype=float).reshape(F.coord_dim))
    return SubmanifoldSpec(ambient, DIAGONAL, offset=offset, label=label)


def AntipodalGraph(ambient: ManifoldSpec, label: str = "") -> SubmanifoldSpec:
    F = _square_factor(ambient)
    if F.kind != SPHERE:
        raise ConfigurationError("antipodal graph needs S^n x S^n")
    return SubmanifoldSpec(ambient, ANTIPODAL_GRAPH, label=label)


def Subtorus(ambient: ManifoldSpec, fixed: dict, label: str = "") -> SubmanifoldSpec:
    if not ambient.is_flat_torus:
        raise ConfigurationError("subtori live in flat tori")
    items = tuple(sorted((int(i), float(wrap_angle(v))) for i, v in fixed.items()))
    if any(i < 0 or i >= ambient.coord_dim for i, _ in items):
        raise ConfigurationError("fixed coordinate index out of range")
    return SubmanifoldSpec(ambient, SUBTORUS, fixed=items, label=label)


def Custom(ambient: ManifoldSpec, project: Callable, dimension: int, *, distance: Callable | None = None,
           sampler: Callable | None = None, margin: float | None = None, label: str = "custom",
           audit_samples: int = 64, seed: int = 0, params: dict | None = None) -> SubmanifoldSpec:
    """User-described submanifold; the projection is audited for idempotence on random samples."""
    N = SubmanifoldSpec(ambient, CUSTOM, label=label, custom_project=project, custom_distance=distance,
                        custom_sampler=sampler, custom_dimension=int(dimension), margin=margin,
                        params=dict(params or {}))
    if audit_samples:
        audit_projection(N, audit_samples, seed)
    return N


def audit_projection(N: SubmanifoldSpec, samples: int = 64, seed: int = 0) -> float:
    """Max deviation of project(project(x)) from project(x); raises if above 1e-9."""
    rng = np.random.default_rng(seed)
    X = N.ambient.sample(rng, samples)
    P = N.project(X)
    PP = N.project(P)
    err = float(np.max(N.ambient.dist(P, PP)))
    on = float(np.max(N.distance(P)))
    if err > 1e-9 or on > 1e-9:
        raise ConfigurationError(
            f"projection of {N.label!r} is not idempotent (err {err:.2e}, membership {on:.2e})")
    return err


def whole(ambient: ManifoldSpec) -> SubmanifoldSpec:
    """The manifold itself, viewed as a submanifold (empty cut locus)."""
    return Custom(ambient, lambda X: np.asarray(X, dtype=float), ambient.dimension,
                  distance=lambda X: np.zeros(np.shape(X)[:-1]),
                  sampler=lambda res: ambient.grid(res), margin=float("inf"), label="whole")
