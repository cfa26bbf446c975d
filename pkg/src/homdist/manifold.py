"""Geometry kernel for the catalog manifolds.

Every catalog manifold is represented in embedded or angle coordinates:

* ``Circle`` / ``Torus(n)``: angles canonicalized to ``[0, 2pi)``, flat metric.
* ``Sphere(n)``: unit vectors in ``R^(n+1)``, round metric.
* ``RealProjective(n)``: unit vectors with the first non-negligible coordinate
  positive (sign-canonical representative of ``{x, -x}``).
* ``Product(M1, ..., Mk)``: concatenated factor coordinates, product metric.
* ``Euclidean(n)``: plain ``R^n``; only used as a map target (workspace plane).

The array kernels on :class:`ManifoldSpec` broadcast over leading axes, so a
batch of points is just an ``(k, coord_dim)`` array.  The public operations
(:func:`exp_map`, :func:`riemannian_distance`, ...) work on the thin
:class:`Point` / :class:`TangentVector` wrappers.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, ContractError

TOL_ON = 1e-9
TOL_JOIN = 1e-6
EPS_LEN = 1e-6
THETA_MIN = 1e-3
K_CONT = 8

TWO_PI = 2.0 * np.pi
_SIGN_TOL = 1e-12

CIRCLE = "Circle"
SPHERE = "Sphere"
TORUS = "Torus"
REAL_PROJECTIVE = "RealProjective"
PRODUCT = "Product"
EUCLIDEAN = "Euclidean"


def wrap_angle(a):
    """Map angles to ``[0, 2pi)``."""
    a = np.mod(a, TWO_PI)
    if isinstance(a, np.ndarray):
        a[a >= TWO_PI] = 0.0
        return a
    return 0.0 if a >= TWO_PI else float(a)


def wrap_diff(a):
    """Map angle differences to ``(-pi, pi]``."""
    a = np.mod(np.asarray(a, dtype=float) + np.pi, TWO_PI) - np.pi
    if isinstance(a, np.ndarray):
        a[a <= -np.pi] += TWO_PI
        return a
    return a + TWO_PI if a <= -np.pi else float(a)


def _norm(v):
    return np.linalg.norm(v, axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _sign_canonical(X):
    # flip so the first coordinate with |c| > _SIGN_TOL is positive
    X = np.asarray(X, dtype=float)
    big = np.abs(X) > _SIGN_TOL
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(X, first[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0, -1.0, 1.0)
    return X * sign[..., None]


def _tangent_basis(x):
    """Orthonormal basis of the tangent space of the unit sphere at ``x``."""
    m = x.shape[0]
    q, _ = np.linalg.qr(np.column_stack([x, np.eye(m)]))
    basis = q[:, 1:m].T
    # QR sign conventions vary; fix orientation deterministically
    for i, b in enumerate(basis):
        k = np.argmax(np.abs(b) > 1e-12)
        if b[k] < 0:
            basis[i] = -b
    return basis


@dataclass(frozen=True)
class ManifoldSpec:
    """Catalog manifold.  Build instances with :func:`Circle`, :func:`Sphere`, ..."""

    kind: str
    n: int = 1
    factors: tuple = ()

    def __post_init__(self):
        if self.kind not in (CIRCLE, SPHERE, TORUS, REAL_PROJECTIVE, PRODUCT, EUCLIDEAN):
            raise ConfigurationError(f"unknown manifold kind {self.kind!r}")
        if self.kind == PRODUCT:
            if len(self.factors) < 1 or not all(isinstance(f, ManifoldSpec) for f in self.factors):
                raise ConfigurationError("Product needs at least one ManifoldSpec factor")
        elif self.n < 1:
            raise ConfigurationError(f"{self.kind} dimension must be >= 1, got {self.n}")
        # shape data cached once; the kernels below are called in hot loops
        if self.kind == PRODUCT:
            flat = all(f.is_flat_torus for f in self.factors)
            cdim = sum(f.coord_dim for f in self.factors)
            out, start = [], 0
            for f in self.factors:
                out.append(slice(start, start + f.coord_dim))
                start += f.coord_dim
            slices = tuple(out)
        else:
            flat = self.kind in (CIRCLE, TORUS)
            cdim = self.n + 1 if self.kind in (SPHERE, REAL_PROJECTIVE) else self.n
            slices = ()
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_cdim", cdim)
        object.__setattr__(self, "_slices", slices)

    def __str__(self):
        if self.kind == PRODUCT:
            return "Product(" + ", ".join(str(f) for f in self.factors) + ")"
        if self.kind == CIRCLE:
            return "Circle"
        return f"{self.kind}({self.n})"

    # -- shape bookkeeping ------------------------------------------------
    @property
    def dimension(self) -> int:
        if self.kind == PRODUCT:
            return sum(f.dimension for f in self.factors)
        return self.n

    @property
    def coord_dim(self) -> int:
        return self._cdim

    @property
    def slices(self) -> list[slice]:
        return list(self._slices)

    @property
    def is_flat_torus(self) -> bool:
        return self._flat

    def _split(self, X):
        return [X[..., s] for s in self.slices]

    # -- kernels ----------------------------------------------------------
    def canonical(self, X):
        X = np.asarray(X, dtype=float)
        k = self.kind
        if self._flat:
            return wrap_angle(X)
        if k == SPHERE:
            return X / _norm(X)[..., None]
        if k == REAL_PROJECTIVE:
            return _sign_canonical(X / _norm(X)[..., None])
        if k == PRODUCT:
            return np.concatenate([f.canonical(x) for f, x in zip(self.factors, self._split(X))], axis=-1)
        return X

    def residual(self, X):
        """Violation of the manifold constraint (0 for valid coordinates)."""
        X = np.asarray(X, dtype=float)
        k = self.kind
        if self._flat:
            bad = (X < 0) | (X >= TWO_PI) | ~np.isfinite(X)
            return np.where(bad.any(axis=-1), np.inf, 0.0)
        if k == SPHERE:
            return np.abs(_norm(X) - 1.0)
        if k == REAL_PROJECTIVE:
            r = np.abs(_norm(X) - 1.0)
            flipped = np.any(_sign_canonical(X) != X, axis=-1)
            return np.where(flipped, np.inf, r)
        if k == PRODUCT:
            return np.max(np.stack([f.residual(x) for f, x in zip(self.factors, self._split(X))]), axis=0)
        return np.where(np.all(np.isfinite(X), axis=-1), 0.0, np.inf)

    def contains(self, X, tol=TOL_ON):
        return self.residual(X) <= tol

    def to_tangent(self, X, V):
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        k = self.kind
        if k in (SPHERE, REAL_PROJECTIVE):
            return V - _dot(V, X)[..., None] * X
        if k == PRODUCT:
            return np.concatenate(
                [f.to_tangent(x, v) for f, x, v in zip(self.factors, self._split(X), self._split(V))], axis=-1)
        return V + 0.0 * X

    def tangent_residual(self, X, V):
        V = np.asarray(V, dtype=float)
        return _norm(V - self.to_tangent(X, V))

    def dist(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        k = self.kind
        if self._flat:
            return _norm(wrap_diff(Y - X))
        if k == SPHERE:
            return 2.0 * np.arctan2(_norm(X - Y), _norm(X + Y))
        if k == REAL_PROJECTIVE:
            a = 2.0 * np.arctan2(_norm(X - Y), _norm(X + Y))
            return np.minimum(a, np.pi - a)
        if k == PRODUCT:
            parts = [f.dist(x, y) for f, x, y in zip(self.factors, self._split(X), self._split(Y))]
            return np.sqrt(sum(p ** 2 for p in parts))
        return _norm(Y - X)

    def log(self, X, Y):
        """Initial velocity of a minimizing geodesic X -> Y with length d(X, Y).

        Ties (cut points) are broken deterministically; use
        :func:`minimizing_geodesics` to enumerate them.
        """
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        k = self.kind
        if self._flat:
            return wrap_diff(Y - X)
        if k == SPHERE:
            return _sphere_log(X, Y)
        if k == REAL_PROJECTIVE:
            s = np.where(_dot(X, Y) < 0, -1.0, 1.0)
            return _sphere_log(X, Y * s[..., None])
        if k == PRODUCT:
            return np.concatenate(
                [f.log(x, y) for f, x, y in zip(self.factors, self._split(X), self._split(Y))], axis=-1)
        return Y - X

    def exp(self, X, V):
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        k = self.kind
        if self._flat:
            return wrap_angle(X + V)
        if k in (SPHERE, REAL_PROJECTIVE):
            return self.canonical(_sphere_exp(X, V))
        if k == PRODUCT:
            return np.concatenate(
                [f.exp(x, v) for f, x, v in zip(self.factors, self._split(X), self._split(V))], axis=-1)
        return X + V

    def geodesic_velocity(self, X, V, t):
        """Velocity at time ``t`` of ``s -> exp(X, s V)``, in the chart of the lifted curve."""
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        k = self.kind
        if k in (SPHERE, REAL_PROJECTIVE):
            nv = _norm(V)[..., None]
            return -nv * np.sin(nv * t) * X + np.cos(nv * t) * V
        if k == PRODUCT:
            return np.concatenate(
                [f.geodesic_velocity(x, v, t) for f, x, v in zip(self.factors, self._split(X), self._split(V))],
                axis=-1)
        return V + 0.0 * X

    def interp(self, X, Y, s):
        """Point at fraction ``s`` along the (chosen) minimizing geodesic X -> Y."""
        s = np.asarray(s, dtype=float)
        return self.exp(X, s[..., None] * self.log(X, Y) if s.ndim else s * self.log(X, Y))

    def sample(self, rng: np.random.Generator, size: int):
        k = self.kind
        if k in (CIRCLE, TORUS):
            return rng.uniform(0.0, TWO_PI, size=(size, self.n))
        if k in (SPHERE, REAL_PROJECTIVE):
            return self.canonical(rng.standard_normal((size, self.n + 1)))
        if k == PRODUCT:
            return np.concatenate([f.sample(rng, size) for f in self.factors], axis=-1)
        return rng.standard_normal((size, self.n))

    def grid(self, resolution: int):
        """Deterministic grid with roughly ``resolution`` samples per dimension."""
        k = self.kind
        res = int(resolution)
        if res < 2:
            raise ConfigurationError("grid resolution must be >= 2")
        if k in (CIRCLE, TORUS):
            axis = TWO_PI * np.arange(res) / res
            mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=-1)
        if k in (SPHERE, REAL_PROJECTIVE):
            if self.n == 1:
                phi = TWO_PI * np.arange(res) / res
                pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
            elif self.n == 2:
                theta = np.pi * np.arange(res) / (res - 1)
                phi = TWO_PI * np.arange(res) / res
                th, ph = np.meshgrid(theta[1:-1], phi, indexing="ij")
                body = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
                pts = np.concatenate([[[0.0, 0.0, 1.0]], body.reshape(-1, 3), [[0.0, 0.0, -1.0]]])
            else:
                pts = self.sample(np.random.default_rng(0), res ** self.n)
            pts = self.canonical(pts)
            if k == REAL_PROJECTIVE:
                pts = np.unique(np.round(pts, 12), axis=0)
                pts = self.canonical(pts)
            return pts
        if k == PRODUCT:
            grids = [f.grid(res) for f in self.factors]
            idx = itertools.product(*[range(len(g)) for g in grids])
            return np.array([np.concatenate([g[i] for g, i in zip(grids, ii)]) for ii in idx])
        raise ConfigurationError("Euclidean spaces have no finite grid")


def _sphere_exp(X, V):
    nv = _norm(V)[..., None]
    small = nv < 1e-15
    safe = np.where(small, 1.0, nv)
    out = np.cos(nv) * X + np.where(small, V, np.sin(nv) * V / safe)
    return out / _norm(out)[..., None]


def _sphere_log(X, Y):
    c = _dot(X, Y)
    W = Y - c[..., None] * X
    nw = _norm(W)
    theta = np.arctan2(nw, c)
    tiny = nw < 1e-15
    safe = np.where(tiny, 1.0, nw)
    out = W * (theta / safe)[..., None]
    if np.any(tiny & (c < 0)):
        # antipodal: choose a deterministic direction from the tangent basis
        Xb = np.broadcast_to(X, out.shape).reshape(-1, X.shape[-1])
        flat = out.reshape(-1, X.shape[-1]).copy()
        mask = np.broadcast_to(tiny & (c < 0), out.shape[:-1]).ravel()
        for i in np.nonzero(mask)[0]:
            flat[i] = np.pi * _tangent_basis(Xb[i])[0]
        out = flat.reshape(out.shape)
    return out


def Circle() -> ManifoldSpec:
    return ManifoldSpec(CIRCLE, 1)


def Sphere(n: int) -> ManifoldSpec:
    return ManifoldSpec(SPHERE, int(n))


def Torus(n: int) -> ManifoldSpec:
    return ManifoldSpec(TORUS, int(n))


def RealProjective(n: int) -> ManifoldSpec:
    return ManifoldSpec(REAL_PROJECTIVE, int(n))


def Product(*factors: ManifoldSpec) -> ManifoldSpec:
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    return ManifoldSpec(PRODUCT, sum(f.dimension for f in factors), tuple(factors))


def Euclidean(n: int) -> ManifoldSpec:
    return ManifoldSpec(EUCLIDEAN, int(n))


# ---------------------------------------------------------------------------
# Point-level types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Point:
    manifold: ManifoldSpec
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape[0] != self.manifold.coord_dim:
            raise ConfigurationError(
                f"{self.manifold} expects {self.manifold.coord_dim} coordinates, got {c.shape[0]}")
        if self.manifold.residual(c) > TOL_ON:
            raise ConfigurationError(f"coordinates {c} are not on {self.manifold}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_raw(cls, manifold: ManifoldSpec, coords) -> "Point":
        """Canonicalize arbitrary coordinates (normalize, wrap, fix sign) first."""
        return cls(manifold, manifold.canonical(np.asarray(coords, dtype=float)))

    def __repr__(self):
        return f"Point({self.manifold}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: Point
    components: np.ndarray

    def __post_init__(self):
        v = np.array(self.components, dtype=float).reshape(-1)
        if v.shape != self.base.coords.shape:
            raise ConfigurationError("tangent vector and base point have different coordinate sizes")
        if self.base.manifold.tangent_residual(self.base.coords, v) > TOL_ON * max(1.0, float(_norm(v))):
            raise ConfigurationError("vector is not tangent at its base point")
        v.setflags(write=False)
        object.__setattr__(self, "components", v)

    @property
    def norm(self) -> float:
        return float(_norm(self.components))


@dataclass(frozen=True, eq=False)
class GeodesicSegment:
    """Unit-speed geodesic ``t -> exp(start, t * initial_velocity)`` on ``[0, length]``."""

    start: Point
    initial_velocity: TangentVector
    length: float

    def __post_init__(self):
        if self.length < 0:
            raise ConfigurationError("segment length must be non-negative")
        if self.length > 0 and abs(self.initial_velocity.norm - 1.0) > TOL_ON:
            raise ConfigurationError("segment velocity must be unit length")

    @property
    def manifold(self) -> ManifoldSpec:
        return self.start.manifold

    def point(self, t: float) -> Point:
        M = self.manifold
        return Point(M, M.exp(self.start.coords, t * self.initial_velocity.components))

    @property
    def end(self) -> Point:
        return self.point(self.length)

    def velocity_at(self, t: float) -> np.ndarray:
        return self.manifold.geodesic_velocity(self.start.coords, self.initial_velocity.components, t)

    def to_path(self, samples: int = 17) -> "Path":
        M = self.manifold
        t = np.linspace(0.0, 1.0, samples)
        V = self.initial_velocity.components * self.length
        return Path(M, t, M.exp(self.start.coords, t[:, None] * V))


@dataclass(frozen=True)
class Minimizers:
    """All minimizing geodesics between two points (finite sample if ``continuum``)."""

    segments: tuple
    continuum: bool = False

    def __len__(self):
        return len(self.segments)

    def __iter__(self) -> Iterator[GeodesicSegment]:
        return iter(self.segments)

    def __getitem__(self, i):
        return self.segments[i]


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Path:
    """Polyline on a manifold, sampled at strictly increasing times ``0 = t_0 < ... < t_last = 1``."""

    manifold: ManifoldSpec
    t: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(-1)
        X = np.array(self.coords, dtype=float).reshape(len(t), -1)
        if len(t) < 2:
            raise ContractError("a path needs at least 2 samples")
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ContractError("path times must increase strictly from 0 to 1")
        if X.shape[1] != self.manifold.coord_dim:
            raise ContractError("path coordinates do not match the manifold")
        if np.any(self.manifold.residual(X) > TOL_ON):
            raise ContractError(f"path leaves {self.manifold}")
        t.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "coords", X)

    @classmethod
    def _trusted(cls, manifold: ManifoldSpec, t, X) -> "Path":
        # for samples derived from already validated paths
        obj = object.__new__(cls)
        t = np.asarray(t, dtype=float)
        X = np.asarray(X, dtype=float)
        t.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(obj, "manifold", manifold)
        object.__setattr__(obj, "t", t)
        object.__setattr__(obj, "coords", X)
        return obj

    @classmethod
    def constant(cls, manifold: ManifoldSpec, x) -> "Path":
        x = np.asarray(x, dtype=float)
        return cls(manifold, np.array([0.0, 1.0]), np.stack([x, x]))

    @classmethod
    def geodesic(cls, manifold: ManifoldSpec, x, y, samples: int = 17) -> "Path":
        """Minimizing geodesic from x to y (deterministic tie-break)."""
        x = np.asarray(x, dtype=float)
        t = np.linspace(0.0, 1.0, samples)
        V = manifold.log(x, np.asarray(y, dtype=float))
        X = manifold.exp(x, t[:, None] * V)
        X[0] = x
        return cls(manifold, t, X)

    def __len__(self):
        return len(self.t)

    @property
    def start(self) -> np.ndarray:
        return self.coords[0]

    @property
    def end(self) -> np.ndarray:
        return self.coords[-1]

    @property
    def samples(self) -> list[tuple[float, Point]]:
        return [(float(t), Point(self.manifold, x)) for t, x in zip(self.t, self.coords)]

    def length(self) -> float:
        return float(np.sum(self.manifold.dist(self.coords[:-1], self.coords[1:])))

    def at(self, s) -> np.ndarray:
        """Evaluate at parameter(s) ``s`` by geodesic interpolation between samples."""
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, 1.0)
        i = np.clip(np.searchsorted(self.t, s, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[i], self.t[i + 1]
        lam = (s - t0) / (t1 - t0)
        M = self.manifold
        A, B = self.coords[i], self.coords[i + 1]
        return M.exp(A, lam[:, None] * M.log(A, B))

    def resample(self, m: int = 128) -> np.ndarray:
        return self.at(np.linspace(0.0, 1.0, m))

    def map(self, fn, target: ManifoldSpec) -> "Path":
        """Apply a coordinate map sample-wise, giving a path on ``target``."""
        return Path(target, self.t, fn(self.coords))


def _check_same(x: Point, y: Point):
    if x.manifold != y.manifold:
        raise ConfigurationError(f"points live on different manifolds: {x.manifold} vs {y.manifold}")


def exp_map(x: Point, v: TangentVector, t: float) -> Point:
    if v.base.manifold != x.manifold or not np.allclose(v.base.coords, x.coords, atol=TOL_ON):
        raise ConfigurationError("tangent vector is not based at x")
    if t < 0:
        raise ConfigurationError("exp_map needs t >= 0")
    M = x.manifold
    return Point(M, M.exp(x.coords, t * v.components))


def riemannian_distance(x: Point, y: Point) -> float:
    _check_same(x, y)
    return float(x.manifold.dist(x.coords, y.coords))


def _factor_minimizers(M: ManifoldSpec, x, y):
    """List of (velocity, length) candidates plus continuum flag, not normalized."""
    k = M.kind
    if k in (CIRCLE, TORUS):
        diff = np.mod(y - x, TWO_PI)
        per_coord = []
        for d in diff:
            cands = np.array([d + TWO_PI * j for j in range(-2, 3)])
            best = np.min(np.abs(cands))
            keep = sorted({round(float(c), 15) for c in cands if abs(abs(c) - best) <= EPS_LEN})
            per_coord.append(keep)
        out = [np.array(c) for c in itertools.product(*per_coord)]
        return [(v, float(_norm(v))) for v in out], False
    if k in (SPHERE, REAL_PROJECTIVE):
        lifts = [y] if k == SPHERE else [y, -y]
        dists = [float(Sphere(M.n).dist(x, z)) for z in lifts]
        best = min(dists)
        out, continuum = [], False
        for z, d in zip(lifts, dists):
            if d - best > EPS_LEN:
                continue
            if np.pi - d <= EPS_LEN and M.n >= 2:
                continuum = True
                e1, e2 = _tangent_basis(x)[:2]
                for j in range(K_CONT):
                    a = TWO_PI * j / K_CONT
                    out.append((np.pi * (np.cos(a) * e1 + np.sin(a) * e2), np.pi))
            elif np.pi - d <= EPS_LEN:
                e = _tangent_basis(x)[0]
                out.extend([(np.pi * e, np.pi), (-np.pi * e, np.pi)])
            else:
                out.append((_sphere_log(x, z), d))
        return out, continuum
    if k == PRODUCT:
        parts, continuum = [], False
        for f, s in zip(M.factors, M.slices):
            p, c = _factor_minimizers(f, x[s], y[s])
            parts.append(p)
            continuum |= c
        out = []
        for combo in itertools.product(*parts):
            v = np.concatenate([c[0] for c in combo])
            out.append((v, float(np.sqrt(sum(c[1] ** 2 for c in combo)))))
        return out, continuum
    return [(y - x, float(_norm(y - x)))], False


def minimizing_geodesics(x: Point, y: Point) -> Minimizers:
    """All distance-realizing geodesics from x to y.

    Antipodal pairs on spheres of dimension >= 2 give ``continuum=True`` and a
    sample of ``K_CONT`` meridians.
    """
    _check_same(x, y)
    M = x.manifold
    cands, continuum = _factor_minimizers(M, x.coords, y.coords)
    segs = []
    for v, length in cands:
        if length > 0:
            u = v / length
        else:
            u = np.zeros_like(v)
        segs.append(GeodesicSegment(x, TangentVector(x, M.to_tangent(x.coords, u)), length))
    # drop numerically duplicated directions
    uniq = []
    for s in segs:
        if all(np.linalg.norm(s.initial_velocity.components - o.initial_velocity.components) > THETA_MIN
               for o in uniq) or s.length == 0:
            uniq.append(s)
    if uniq and uniq[0].length == 0:
        uniq = uniq[:1]
    return Minimizers(tuple(uniq), continuum)


def concatenate_paths(a: Path, b: Path) -> Path:
    """Traverse ``a`` on ``[0, 1/2]`` then ``b`` on ``[1/2, 1]``; the joint is ``a``'s endpoint."""
    if a.manifold != b.manifold:
        raise ContractError("cannot concatenate paths on different manifolds")
    gap = float(a.manifold.dist(a.end, b.start))
    if gap > TOL_JOIN:
        raise ContractError(f"path endpoints do not meet (gap {gap:.3e} > {TOL_JOIN})")
    t = np.concatenate([0.5 * a.t, 0.5 + 0.5 * b.t[1:]])
    X = np.concatenate([a.coords, b.coords[1:]])
    return Path._trusted(a.manifold, t, X)


def concatenate_many(paths: Sequence[Path]) -> Path:
    """Concatenate several paths, each getting an equal share of ``[0, 1]``."""
    paths = list(paths)
    if len(paths) == 1:
        return paths[0]
    M = paths[0].manifold
    k = len(paths)
    ts, xs = [paths[0].t / k], [paths[0].coords]
    for i, p in enumerate(paths[1:], start=1):
        if p.manifold != M:
            raise ContractError("cannot concatenate paths on different manifolds")
        gap = float(M.dist(xs[-1][-1], p.start))
        if gap > TOL_JOIN:
            raise ContractError(f"path endpoints do not meet (gap {gap:.3e} > {TOL_JOIN})")
        ts.append((i + p.t[1:]) / k)
        xs.append(p.coords[1:])
    t = np.concatenate(ts)
    t[-1] = 1.0
    return Path._trusted(M, t, np.concatenate(xs))


def reverse_path(a: Path) -> Path:
    return Path._trusted(a.manifold, (1.0 - a.t[::-1]).copy(), a.coords[::-1].copy())


def sup_distance(a: Path, b: Path, m: int = 128) -> float:
    """Sup of pointwise distances on a common ``m``-point resampling grid."""
    if a.manifold != b.manifold:
        raise ContractError("paths live on different manifolds")
    return float(np.max(a.manifold.dist(a.resample(m), b.resample(m))))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_path_csv(path: Path, filename) -> None:
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i}" for i in range(path.manifold.coord_dim)])
        for t, x in zip(path.t, path.coords):
            w.writerow([repr(float(t))] + [repr(float(c)) for c in x])


def read_path_csv(manifold: ManifoldSpec, filename) -> Path:
    data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    return Path(manifold, data[:, 0], data[:, 1:])


def write_points_csv(points, filename, header: Sequence[str] | None = None) -> None:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header) if header else [f"x{i}" for i in range(points.shape[1])])
        for x in points:
            w.writerow([repr(float(c)) for c in x])


def hausdorff(M: ManifoldSpec, A, B, chunk: int = 2048) -> float:
    """Hausdorff distance between two finite point sets on ``M``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if len(A) == 0 or len(B) == 0:
        return 0.0 if len(A) == len(B) else float("inf")

    def directed(P, Q):
        worst = 0.0
        for i in range(0, len(P), chunk):
            d = M.dist(P[i:i + chunk, None, :], Q[None, :, :])
            worst = max(worst, float(np.max(np.min(d, axis=1))))
        return worst

    return max(directed(A, B), directed(B, A))


__all__ = [
    "TOL_ON", "TOL_JOIN", "EPS_LEN", "THETA_MIN", "K_CONT",
    "ManifoldSpec", "Circle", "Sphere", "Torus", "RealProjective", "Product", "Euclidean",
    "Point", "TangentVector", "GeodesicSegment", "Minimizers", "Path",
    "exp_map", "riemannian_distance", "minimizing_geodesics",
    "concatenate_paths", "concatenate_many", "reverse_path", "sup_distance",
    "wrap_angle", "wrap_diff", "write_path_csv", "read_path_csv", "write_points_csv", "hausdorff",
]
