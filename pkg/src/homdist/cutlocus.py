"""Distance to submanifolds, N-segments, analytic cut loci and separation-point detection.

Analytic cut loci are only known for the catalog pairs handled by
:func:`cut_locus_analytic`; :func:`detect_separation_points` is the numerical
cross-check (grid scan plus bisection along grid edges where the chosen
minimizing segment jumps).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError, DomainError
from .manifold import (
    CIRCLE, EPS_LEN, K_CONT, PRODUCT, REAL_PROJECTIVE, SPHERE, THETA_MIN, TORUS, TWO_PI,
    GeodesicSegment, ManifoldSpec, Minimizers, Point, Sphere, TangentVector,
    _tangent_basis, minimizing_geodesics, wrap_diff,
)
from .morse import SQUARED_DISTANCE, CriticalLevel, NavigationFunction
from .submanifold import (
    ANTIPODAL_GRAPH, DIAGONAL, SINGLE_POINT, SUBTORUS,
    AntipodalGraph, Custom, Diagonal, SinglePoint, Subtorus, SubmanifoldSpec,
    injectivity_radius, whole,
)

CUT_MARGIN = 1e-3

__all__ = [
    "CUT_MARGIN", "SubmanifoldSpec", "CutLocusDescriptor", "GridSpec",
    "SinglePoint", "Diagonal", "Subtorus", "AntipodalGraph", "Custom", "whole",
    "distance_to_submanifold", "n_segments", "cut_locus_analytic",
    "detect_separation_points", "squared_distance_function",
]


@dataclass(frozen=True, eq=False)
class CutLocusDescriptor:
    ambient: ManifoldSpec
    pieces: tuple
    analytic: bool = True
    supported: bool = True
    label: str = ""

    def distance(self, X):
        X = np.asarray(X, dtype=float)
        if not self.pieces:
            return np.full(X.shape[:-1], np.inf)
        return np.min(np.stack([p.distance(X) for p in self.pieces], axis=-1), axis=-1)

    def project(self, X):
        """Nearest point over all pieces."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = np.stack([p.distance(X) for p in self.pieces], axis=-1)
        best = np.argmin(D, axis=-1)
        P = np.stack([p.project(X) for p in self.pieces], axis=1)
        return P[np.arange(len(X)), best]

    def sample(self, resolution: int = 64):
        if not self.pieces:
            return np.zeros((0, self.ambient.coord_dim))
        return np.concatenate([p.sample(resolution) for p in self.pieces])

    def describe(self) -> dict:
        return {"ambient": str(self.ambient), "analytic": self.analytic, "supported": self.supported,
                "label": self.label, "pieces": [p.describe() for p in self.pieces]}


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 200
    refine: bool = True
    bisection_steps: int = 48


# ---------------------------------------------------------------------------
# distances and N-segments
# ---------------------------------------------------------------------------

def distance_to_submanifold(y: Point, N: SubmanifoldSpec) -> tuple[float, Point]:
    if y.manifold != N.ambient:
        raise ConfigurationError("point and submanifold live in different manifolds")
    if N.kind == SINGLE_POINT:
        return float(N.ambient.dist(y.coords, N.point)), Point(N.ambient, N.point)
    foot = N.ambient.canonical(N.project(y.coords))
    return float(N.distance(y.coords)), Point(N.ambient, foot)


def _segment(M, start, velocity, length) -> GeodesicSegment:
    x = Point(M, M.canonical(start))
    v = M.to_tangent(x.coords, velocity)
    return GeodesicSegment(x, TangentVector(x, v), float(length))


def n_segments(y: Point, N: SubmanifoldSpec) -> Minimizers:
    """All N-segments ending at ``y`` (unit speed, starting on N)."""
    M = N.ambient
    if y.manifold != M:
        raise ConfigurationError("point and submanifold live in different manifolds")
    k = N.kind
    if k == SINGLE_POINT:
        return minimizing_geodesics(Point(M, N.point), y)
    if k in (DIAGONAL, ANTIPODAL_GRAPH):
        F = M.factors[0]
        d = F.coord_dim
        a, b = y.coords[:d], y.coords[d:]
        if k == ANTIPODAL_GRAPH:
            target = F.canonical(-b)
        elif N.offset is not None:
            target = F.canonical(b + N.offset)
        else:
            target = b
        base = minimizing_geodesics(Point(F, a), Point(F, target))
        segs = []
        for s in base:
            if s.length == 0:
                return Minimizers((_segment(M, y.coords, np.zeros(M.coord_dim), 0.0),), False)
            m = s.point(s.length / 2).coords
            w = s.velocity_at(s.length / 2)
            if k == ANTIPODAL_GRAPH:
                start, vel = np.concatenate([m, -m]), np.concatenate([-w, -w])
            else:
                mb = F.canonical(m - N.offset) if N.offset is not None else m
                start, vel = np.concatenate([m, mb]), np.concatenate([-w, w])
            segs.append(_segment(M, start, vel / np.sqrt(2.0), s.length / np.sqrt(2.0)))
        return Minimizers(tuple(segs), base.continuum)
    if k == SUBTORUS:
        choices = []
        for i, v in N.fixed:
            dd = float(wrap_diff(y.coords[i] - v))
            choices.append([dd, dd - TWO_PI] if abs(abs(dd) - np.pi) <= EPS_LEN else [dd])
        foot = N.project(y.coords)
        segs = []
        for combo in itertools.product(*choices):
            vel = np.zeros(M.coord_dim)
            for (i, _), dd in zip(N.fixed, combo):
                vel[i] = dd
            L = float(np.linalg.norm(vel))
            segs.append(_segment(M, foot, vel / L if L > 0 else vel, L))
        return Minimizers(tuple(segs), False)
    foot = N.project(y.coords)
    v = M.log(foot, y.coords)
    L = float(np.linalg.norm(v))
    return Minimizers((_segment(M, foot, v / L if L > 0 else v, L),), False)


# ---------------------------------------------------------------------------
# analytic cut loci
# ---------------------------------------------------------------------------

def _projective_hyperplane(M: ManifoldSpec, p) -> SubmanifoldSpec:
    """Lines orthogonal to ``p`` in RP^n: an embedded RP^(n-1)."""
    p = np.asarray(p, dtype=float)
    basis = _tangent_basis(p)

    def project(X):
        X = np.asarray(X, dtype=float)
        Z = X - np.sum(X * p, axis=-1)[..., None] * p
        nz = np.linalg.norm(Z, axis=-1)[..., None]
        Z = np.where(nz < 1e-15, basis[0], Z / np.where(nz < 1e-15, 1.0, nz))
        return M.canonical(Z)

    def distance(X):
        return np.arcsin(np.clip(np.abs(np.sum(np.asarray(X) * p, axis=-1)), 0.0, 1.0))

    def sampler(res):
        G = Sphere(M.n - 1).grid(res) if M.n > 1 else np.array([[1.0]])
        return M.canonical(G @ basis)

    return Custom(M, project, M.n - 1, distance=distance, sampler=sampler, margin=np.pi / 2,
                  label=f"RP^{M.n - 1}")


def _lift_factor_piece(M: ManifoldSpec, i: int, piece: SubmanifoldSpec) -> SubmanifoldSpec:
    """Product lift: ``M_1 x ... x piece x ... x M_k``."""
    sl = M.slices[i]

    def project(X):
        Y = np.array(X, dtype=float, copy=True)
        Y[..., sl] = piece.project(Y[..., sl])
        return Y

    def distance(X):
        return piece.distance(np.asarray(X)[..., sl])

    def sampler(res):
        parts = []
        for j, F in enumerate(M.factors):
            parts.append(piece.sample(res) if j == i else F.grid(res))
        return np.array([np.concatenate(c) for c in itertools.product(*parts)])

    return Custom(M, project, M.dimension - M.factors[i].dimension + piece.dimension,
                  distance=distance, sampler=sampler, margin=piece.injectivity_margin,
                  label=f"factor{i}:{piece.label or piece.kind}")


def cut_locus_analytic(M: ManifoldSpec, N: SubmanifoldSpec) -> CutLocusDescriptor:
    """Closed-form cut locus for the supported catalog pairs.

    Unsupported pairs return a descriptor with ``supported=False`` and no
    pieces instead of raising, so callers can fall back to numerical detection.
    """
    if N.ambient != M:
        raise ConfigurationError("submanifold does not live in M")
    if N.kind == SINGLE_POINT:
        p = N.point
        if M.kind == SPHERE:
            return CutLocusDescriptor(M, (SinglePoint(M, -p, label="antipode"),), label="antipode")
        if M.kind in (CIRCLE, TORUS):
            pieces = tuple(Subtorus(M, {i: p[i] + np.pi}, label=f"x{i}={float(p[i] + np.pi) % TWO_PI:.6g}")
                           for i in range(M.coord_dim))
            return CutLocusDescriptor(M, pieces, label="wedge" if M.coord_dim > 1 else "opposite point")
        if M.kind == REAL_PROJECTIVE:
            return CutLocusDescriptor(M, (_projective_hyperplane(M, p),), label=f"RP^{M.n - 1}")
        if M.kind == PRODUCT:
            pieces = []
            for i, (F, sl) in enumerate(zip(M.factors, M.slices)):
                sub = cut_locus_analytic(F, SinglePoint(F, p[sl]))
                if not sub.supported:
                    return CutLocusDescriptor(M, (), analytic=False, supported=False, label="unsupported")
                pieces.extend(_lift_factor_piece(M, i, q) for q in sub.pieces)
            return CutLocusDescriptor(M, tuple(pieces), label="product")
    if N.kind == DIAGONAL and N.offset is None and M.kind == PRODUCT and M.factors[0].kind == SPHERE:
        return CutLocusDescriptor(M, (AntipodalGraph(M, label="antipodal graph"),), label="antipodal graph")
    if N.kind == "Custom" and N.label == "whole":
        return CutLocusDescriptor(M, (), label="empty")
    return CutLocusDescriptor(M, (), analytic=False, supported=False, label="unsupported")


# ---------------------------------------------------------------------------
# numerical separation detection
# ---------------------------------------------------------------------------

def _count_and_direction(M: ManifoldSpec, p, X):
    """Vectorized minimizer count (>= 2 or continuum flagged as 2) and chosen direction at ``p``."""
    k = M.kind
    if k in (CIRCLE, TORUS):
        d = wrap_diff(X - p)
        ties = np.abs(np.abs(d) - np.pi) <= EPS_LEN
        count = np.prod(np.where(ties, 2, 1), axis=-1)
        return count, d
    if k in (SPHERE, REAL_PROJECTIVE):
        Y = X
        if k == REAL_PROJECTIVE:
            s = np.sum(X * p, axis=-1)
            Y = X * np.where(s < 0, -1.0, 1.0)[..., None]
            tie = np.abs(s) <= np.sin(EPS_LEN)
        else:
            tie = M.dist(X, p) >= np.pi - EPS_LEN
        P = np.broadcast_to(p, Y.shape)
        V = Sphere(M.n).log(P, Y)
        return np.where(tie, 2, 1), V
    if k == PRODUCT:
        counts, dirs = [], []
        for F, sl in zip(M.factors, M.slices):
            c, d = _count_and_direction(F, p[sl], X[..., sl])
            counts.append(c)
            dirs.append(d)
        return np.prod(np.stack(counts), axis=0), np.concatenate(dirs, axis=-1)
    raise ConfigurationError(f"no separation detection on {M}")


def _unit(V):
    n = np.linalg.norm(V, axis=-1)[..., None]
    return V / np.where(n == 0, 1.0, n)


def _grid_edges(M: ManifoldSpec, G, resolution):
    if M.is_flat_torus:
        tree = cKDTree(np.mod(G, TWO_PI), boxsize=TWO_PI)
        r = 1.01 * TWO_PI / resolution
    elif M.kind == SPHERE:
        tree = cKDTree(G)
        r = 1.5 * TWO_PI / resolution
    else:
        return np.zeros((0, 2), dtype=int)
    return tree.query_pairs(r, output_type="ndarray")


def detect_separation_points(M: ManifoldSpec, N: SubmanifoldSpec, grid: GridSpec = GridSpec()):
    """Points of ``M`` with two or more minimizing N-segments, as a ``(k, coord_dim)`` array.

    Grid samples whose segment count is >= 2 (lengths within ``EPS_LEN``) are
    reported directly.  With ``grid.refine`` each grid edge along which the
    chosen segment direction differs by more than ``THETA_MIN`` is bisected;
    if the jump survives down to round-off the bisection limit is reported.
    Only point submanifolds are supported.
    """
    if N.kind != SINGLE_POINT:
        raise ConfigurationError("separation detection is implemented for point submanifolds")
    p = N.point
    G = M.grid(grid.resolution)
    count, dirs = _count_and_direction(M, p, G)
    found = [G[count >= 2]]
    if grid.refine:
        E = _grid_edges(M, G, grid.resolution)
        if len(E):
            ok = (count[E[:, 0]] == 1) & (count[E[:, 1]] == 1)
            E = E[ok]
            U = _unit(dirs)
            jump = np.linalg.norm(U[E[:, 0]] - U[E[:, 1]], axis=-1) > THETA_MIN
            E = E[jump]
            A, B = G[E[:, 0]], G[E[:, 1]]
            for _ in range(grid.bisection_steps):
                mid = M.interp(A, B, np.full(len(A), 0.5))
                ua = _unit(_count_and_direction(M, p, A)[1])
                um = _unit(_count_and_direction(M, p, mid)[1])
                same = np.linalg.norm(ua - um, axis=-1) <= THETA_MIN
                A = np.where(same[:, None], mid, A)
                B = np.where(same[:, None], B, mid)
            ua = _unit(_count_and_direction(M, p, A)[1])
            ub = _unit(_count_and_direction(M, p, B)[1])
            persists = np.linalg.norm(ua - ub, axis=-1) > THETA_MIN
            mid = M.interp(A, B, np.full(len(A), 0.5))
            tie = _count_and_direction(M, p, mid)[0] >= 2
            found.append(mid[persists & tie])
    pts = np.concatenate(found) if found else np.zeros((0, M.coord_dim))
    if len(pts):
        pts = np.unique(np.round(pts, 10), axis=0)
    return pts


# ---------------------------------------------------------------------------
# squared distance navigation function
# ---------------------------------------------------------------------------

def squared_distance_function(M: ManifoldSpec, N: SubmanifoldSpec, cut: CutLocusDescriptor,
                              cut_margin: float = CUT_MARGIN) -> NavigationFunction:
    """``d(., N)^2`` restricted to points farther than ``cut_margin`` from the cut locus.

    Its only critical level is ``N`` at value 0 (index 0); the gradient is
    ``-2 log_y(foot(y))``, i.e. ``2 d`` times the outgoing unit velocity of
    the N-segment at ``y``.
    """
    if not cut.supported:
        raise ConfigurationError("squared_distance_function needs an analytic cut locus")
    if N.ambient != M or cut.ambient != M:
        raise ConfigurationError("submanifold / cut locus do not live in M")

    def off_cut(X):
        return cut.distance(X) > cut_margin

    def value(X):
        return N.distance(X) ** 2

    def gradient(X):
        X = np.asarray(X, dtype=float)
        if not np.all(off_cut(X)):
            raise DomainError("gradient of d(., N)^2 requested on (or too near) the cut locus")
        return -2.0 * M.log(X, N.project(X))

    level = CriticalLevel(0.0, (N,), (0,))
    return NavigationFunction(M, value, gradient, (level,), kind=SQUARED_DISTANCE, domain=off_cut,
                              params={"submanifold": N.describe(), "cut_margin": cut_margin,
                                      "cut": cut.label})
