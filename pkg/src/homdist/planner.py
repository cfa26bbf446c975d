"""Piecewise-continuous generalized motion planners.

A :class:`GeneralizedPlanner` for a pair of maps ``f, g: M -> Y`` is an
ordered list of :class:`PlannerPiece` objects.  Each piece has a domain and a
section that turns a point ``x`` of its domain into a path in ``Y`` from
``f(x)`` to ``g(x)``.  ``plan`` uses the first piece (in declared order)
whose domain contains ``x``; the number of pieces minus one bounds the
homotopic distance ``D(f, g)``.

Two builders realize the flow constructions:

* :func:`build_morse_bott_planner` slides ``x`` down the negative gradient
  flow of a navigation function to a critical point ``alpha``, applies a
  local piece on that critical level, and comes back along the reversed flow
  through ``g``.
* :func:`build_cutlocus_planner` does the same with ``d(., N)^2`` off the cut
  locus, and covers the cut locus itself by tube-enlarged pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .cutlocus import CUT_MARGIN, CutLocusDescriptor, squared_distance_function
from .errors import ConfigurationError, ContractError, CoverageError
from .manifold import (
    PRODUCT, SPHERE, TORUS, TOL_JOIN, TWO_PI,
    Circle, Euclidean, ManifoldSpec, Path, Point, Torus, _factor_minimizers,
    concatenate_many, reverse_path, sup_distance, wrap_angle, wrap_diff,
)
from .morse import (
    FlowResult, FlowSettings, NavigationFunction,
    arc_length_reparametrize, flow_batch,
)
from .submanifold import SubmanifoldSpec

MEMBER_TOL = 1e-8
K_MAX = 1e3
DELTA = 1e-3
RESAMPLE = 128

IDENTITY = "Identity"
CONSTANT_AT = "ConstantAt"
PROJECTION_FIRST = "ProjectionFirst"
PROJECTION_SECOND = "ProjectionSecond"
TRANSLATION = "Translation"
FORWARD_KINEMATICS = "ForwardKinematics"
PRODUCT_PROJECTION = "ProductProjection"
COMPOSE = "Compose"


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MapSpec:
    kind: str
    source: ManifoldSpec
    target: ManifoldSpec
    params: tuple = ()
    inner: Optional["MapSpec"] = None
    outer: Optional["MapSpec"] = None

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        k = self.kind
        if k == IDENTITY:
            return X
        if k == CONSTANT_AT:
            p = np.asarray(self.params, dtype=float)
            return np.broadcast_to(p, X.shape[:-1] + p.shape).copy()
        if k in (PROJECTION_FIRST, PROJECTION_SECOND, PRODUCT_PROJECTION):
            i = {PROJECTION_FIRST: 0, PROJECTION_SECOND: 1}.get(k, self.params[0] if self.params else 0)
            if self.source.kind == PRODUCT:
                return X[..., self.source.slices[i]]
            return X[..., i:i + 1]
        if k == TRANSLATION:
            return wrap_angle(X + np.asarray(self.params, dtype=float))
        if k == FORWARD_KINEMATICS:
            l1, l2 = self.params
            a, b = X[..., 0], X[..., 1]
            return np.stack([l1 * np.cos(a) + l2 * np.cos(a + b), l1 * np.sin(a) + l2 * np.sin(a + b)], axis=-1)
        if k == COMPOSE:
            return self.outer.apply(self.inner.apply(X))
        raise ConfigurationError(f"unknown map kind {k!r}")

    def __call__(self, x):
        if isinstance(x, Point):
            return Point(self.target, self.target.canonical(self.apply(x.coords)))
        return self.apply(x)

    def describe(self) -> dict:
        d = {"kind": self.kind, "source": str(self.source), "target": str(self.target)}
        if self.params:
            d["params"] = [float(p) for p in self.params]
        if self.kind == COMPOSE:
            d["outer"] = self.outer.describe()
            d["inner"] = self.inner.describe()
        return d


def identity_map(M: ManifoldSpec) -> MapSpec:
    return MapSpec(IDENTITY, M, M)


def constant_map(M: ManifoldSpec, target: ManifoldSpec, p) -> MapSpec:
    p = target.canonical(np.asarray(p, dtype=float))
    if target.residual(p) > 1e-9:
        raise ConfigurationError("constant value is not a point of the target")
    return MapSpec(CONSTANT_AT, M, target, tuple(float(c) for c in p))


def projection_first(M: ManifoldSpec) -> MapSpec:
    if M.kind != PRODUCT or len(M.factors) != 2:
        raise ConfigurationError("ProjectionFirst needs a product of two factors")
    return MapSpec(PROJECTION_FIRST, M, M.factors[0])


def projection_second(M: ManifoldSpec) -> MapSpec:
    if M.kind != PRODUCT or len(M.factors) != 2:
        raise ConfigurationError("ProjectionSecond needs a product of two factors")
    return MapSpec(PROJECTION_SECOND, M, M.factors[1])


def product_projection(M: ManifoldSpec, index: int) -> MapSpec:
    """Projection onto one coordinate factor.

    For ``Product`` sources this is the factor ``index``; for ``Torus(n)``
    it is the ``index``-th angle, landing in ``Circle``.
    """
    if M.kind == PRODUCT:
        if not 0 <= index < len(M.factors):
            raise ConfigurationError("factor index out of range")
        return MapSpec(PRODUCT_PROJECTION, M, M.factors[index], (int(index),))
    if M.kind == TORUS:
        if not 0 <= index < M.n:
            raise ConfigurationError("factor index out of range")
        return MapSpec(PRODUCT_PROJECTION, M, Circle(), (int(index),))
    raise ConfigurationError(f"ProductProjection is undefined on {M}")


def translation_map(M: ManifoldSpec, offset) -> MapSpec:
    if not M.is_flat_torus:
        raise ConfigurationError("translations are defined on tori only")
    offset = np.asarray(offset, dtype=float).reshape(M.coord_dim)
    return MapSpec(TRANSLATION, M, M, tuple(float(c) for c in offset))


def forward_kinematics(l1: float, l2: float, source: ManifoldSpec | None = None) -> MapSpec:
    """Planar two-link arm ``(theta1, theta2) -> end effector``."""
    source = source or Torus(2)
    if source.coord_dim != 2 or not source.is_flat_torus:
        raise ConfigurationError("forward kinematics needs a 2-torus of joint angles")
    return MapSpec(FORWARD_KINEMATICS, source, Euclidean(2), (float(l1), float(l2)))


def compose(outer: MapSpec, inner: MapSpec) -> MapSpec:
    """``outer o inner``."""
    if inner.target.coord_dim != outer.source.coord_dim:
        raise ConfigurationError(f"cannot compose: {inner.target} does not feed {outer.source}")
    return MapSpec(COMPOSE, inner.source, outer.target, inner=inner, outer=outer)


# ---------------------------------------------------------------------------
# pieces and planners
# ---------------------------------------------------------------------------

def _as_tuple(domain):
    if domain is None:
        return None
    if isinstance(domain, SubmanifoldSpec):
        return (domain,)
    return tuple(domain)


@dataclass(frozen=True, eq=False)
class PlannerPiece:
    """One local rule: a domain (union of submanifolds and/or a predicate) and a section.

    ``predicate`` is vectorized over rows of coordinates.  With
    ``tube_radius > 0`` the domain is the open tube of that radius around
    ``domain`` and the predicate is evaluated at the nearest-point projection.
    """

    label: str
    f: MapSpec
    g: MapSpec
    section: Callable
    domain: Optional[tuple] = None
    predicate: Optional[Callable] = None
    tube_radius: float = 0.0
    kind: str = "Custom"
    params: dict = field(default_factory=dict)
    lift: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "domain", _as_tuple(self.domain))
        if self.domain is None and self.predicate is None:
            raise ConfigurationError("a planner piece needs a domain or a predicate")
        if self.tube_radius < 0:
            raise ConfigurationError("tube radius must be >= 0")

    def domain_distance(self, X):
        return np.min(np.stack([c.distance(X) for c in self.domain], axis=-1), axis=-1)

    def retract(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(self.domain) == 1:
            return self.domain[0].project(X)
        D = np.stack([c.distance(X) for c in self.domain], axis=-1)
        best = np.argmin(D, axis=-1)
        P = np.stack([c.project(X) for c in self.domain], axis=1)
        return P[np.arange(len(X)), best]

    def contains_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.domain is None:
            return np.asarray(self.predicate(X), dtype=bool)
        d = self.domain_distance(X)
        if self.tube_radius > 0:
            inside = d < self.tube_radius
            probe = self.retract(X)
        else:
            inside = d <= MEMBER_TOL
            probe = X
        if self.predicate is not None and inside.any():
            ok = np.zeros(len(X), dtype=bool)
            ok[inside] = np.asarray(self.predicate(probe[inside]), dtype=bool)
            inside = ok
        return inside

    def contains(self, x) -> bool:
        coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
        return bool(self.contains_many(coords[None, :])[0])

    def describe(self) -> dict:
        d = {"label": self.label, "kind": self.kind, "tube_radius": float(self.tube_radius)}
        if self.domain is not None:
            d["domain"] = [c.describe() for c in self.domain]
        d.update(self.params)
        return d


@dataclass(frozen=True, eq=False)
class GeneralizedPlanner:
    f: MapSpec
    g: MapSpec
    pieces: tuple
    provenance: dict
    prepare: Optional[Callable] = None
    flows: Optional[Callable] = None
    navigation: Optional[NavigationFunction] = None
    name: str = ""

    def __post_init__(self):
        if len(self.pieces) < 1:
            raise ConfigurationError("a planner needs at least one piece")
        if self.f.source != self.g.source or self.f.target != self.g.target:
            raise ConfigurationError("f and g must share source and target")

    @property
    def source(self) -> ManifoldSpec:
        return self.f.source

    @property
    def target(self) -> ManifoldSpec:
        return self.f.target

    @property
    def piece_count(self) -> int:
        return len(self.pieces)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "f": self.f.describe(),
            "g": self.g.describe(),
            "piece_count": self.piece_count,
            "pieces": [p.describe() for p in self.pieces],
            "provenance": self.provenance,
        }


def _coords(x):
    return x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)


def _check_endpoints(pl: GeneralizedPlanner, x, path: Path):
    Y = pl.target
    fx = Y.canonical(pl.f.apply(x))
    gx = Y.canonical(pl.g.apply(x))
    e0 = float(Y.dist(path.start, fx))
    e1 = float(Y.dist(path.end, gx))
    if e0 > TOL_JOIN or e1 > TOL_JOIN:
        raise ContractError(f"planned path misses its endpoints (errors {e0:.2e}, {e1:.2e})")


def claim_indices(pl: GeneralizedPlanner, X):
    """Index of the first piece claiming each row of ``X`` (-1 if none)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if pl.prepare is not None:
        pl.prepare(X)
    out = np.full(len(X), -1)
    todo = np.ones(len(X), dtype=bool)
    for j, piece in enumerate(pl.pieces):
        if not todo.any():
            break
        idx = np.nonzero(todo)[0]
        hit = piece.contains_many(X[idx])
        out[idx[hit]] = j
        todo[idx[hit]] = False
    return out


def plan(pl: GeneralizedPlanner, x, check: bool = True) -> tuple[Path, int]:
    """Path from ``f(x)`` to ``g(x)`` using the first piece whose domain contains ``x``."""
    if isinstance(x, Point) and x.manifold != pl.source:
        raise ConfigurationError("point is not on the planner's source manifold")
    c = pl.source.canonical(_coords(x))
    j = int(claim_indices(pl, c[None, :])[0])
    if j < 0:
        raise CoverageError(f"no planner piece claims {c}")
    path = pl.pieces[j].section(c)
    if check:
        _check_endpoints(pl, c, path)
    return path, j


def plan_many(pl: GeneralizedPlanner, X, check: bool = True) -> list[tuple[Path, int]]:
    X = pl.source.canonical(np.atleast_2d(np.asarray(X, dtype=float)))
    idx = claim_indices(pl, X)
    out = []
    for x, j in zip(X, idx):
        if j < 0:
            raise CoverageError(f"no planner piece claims {x}")
        path = pl.pieces[j].section(x)
        if check:
            _check_endpoints(pl, x, path)
        out.append((path, int(j)))
    return out


# ---------------------------------------------------------------------------
# local piece library
# ---------------------------------------------------------------------------

GEODESIC = "Geodesic"
TRANSLATION_HOMOTOPY = "Translation"
ANTIPODAL_SPHERE = "AntipodalSphere"


@dataclass(frozen=True, eq=False)
class LocalContext:
    """Where a library piece lives: maps, the (union of) domain submanifolds, and sphere axes."""

    f: MapSpec
    g: MapSpec
    domain: tuple
    axes: tuple = ()
    threshold: float = 0.2
    samples: int = 16
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domain", _as_tuple(self.domain))


def _translation_offset(Y: ManifoldSpec, a, b):
    # canonical representative in [-pi, pi) with a slack so that +-pi noise lands on +pi
    d = wrap_diff(np.asarray(b) - np.asarray(a))
    return np.where(d < -np.pi + 1e-9, d + TWO_PI, d)


def _domain_samples(ctx: LocalContext):
    return np.concatenate([c.sample(ctx.samples) for c in ctx.domain])


def standard_local_planners(kind: str, ctx: LocalContext) -> list[PlannerPiece]:
    """Library pieces: ``Geodesic``, ``Translation`` or ``AntipodalSphere``."""
    f, g = ctx.f, ctx.g
    Y = f.target
    S = _domain_samples(ctx)
    FX, GX = Y.canonical(f.apply(S)), Y.canonical(g.apply(S))
    nsamp = 17

    if kind == GEODESIC:
        if Y.kind in (SPHERE,) or Y.is_flat_torus:
            for a, b in zip(FX, GX):
                cands, continuum = _factor_minimizers(Y, a, b)
                if continuum or len(cands) > 1:
                    raise ConfigurationError("Geodesic piece needs a unique minimizing geodesic on its domain")

        def section(x):
            return Path.geodesic(Y, Y.canonical(f.apply(x)), Y.canonical(g.apply(x)), nsamp)

        return [PlannerPiece(ctx.label or "geodesic", f, g, section, domain=ctx.domain, kind=GEODESIC)]

    if kind == TRANSLATION_HOMOTOPY:
        if not Y.is_flat_torus:
            raise ConfigurationError("Translation pieces need a torus target")
        t = np.linspace(0.0, 1.0, nsamp)

        def section(x):
            a = Y.canonical(f.apply(x))
            off = _translation_offset(Y, a, Y.canonical(g.apply(x)))
            return Path(Y, t, wrap_angle(a + t[:, None] * off))

        # offset must be locally constant: check per component
        for comp in ctx.domain:
            P = comp.sample(ctx.samples)
            off = _translation_offset(Y, Y.canonical(f.apply(P)), Y.canonical(g.apply(P)))
            if np.max(np.abs(off - off[0])) > 1e-6:
                raise ConfigurationError("g - f is not constant on a Translation piece component")
        offsets = [[float(c) for c in _translation_offset(Y, Y.canonical(f.apply(P)),
                                                           Y.canonical(g.apply(P)))[0]]
                   for P in (comp.sample(2) for comp in ctx.domain)]
        return [PlannerPiece(ctx.label or "translation", f, g, section, domain=ctx.domain,
                             kind=TRANSLATION_HOMOTOPY, params={"offsets": offsets})]

    if kind == ANTIPODAL_SPHERE:
        if Y.kind != SPHERE:
            raise ConfigurationError("AntipodalSphere pieces need a sphere target")
        if np.max(Y.dist(GX, -FX)) > 1e-9:
            raise ConfigurationError("AntipodalSphere pieces need g = -f on the domain")
        m = Y.coord_dim
        axes = ctx.axes or (np.eye(m)[0], np.eye(m)[1])
        pieces = []
        t = np.linspace(0.0, 1.0, nsamp)
        for n_axis, e in enumerate(axes):
            e = np.asarray(e, dtype=float)
            e = e / np.linalg.norm(e)
            pieces.append(_antipodal_piece(ctx, e, n_axis, t))
        if all(c.dimension == 0 for c in ctx.domain):
            # a finite domain is covered by the first piece(s) that contain it
            needed, todo = [], np.ones(len(S), dtype=bool)
            for p in pieces:
                hit = p.contains_many(S) & todo
                if hit.any():
                    needed.append(p)
                    todo &= ~hit
            pieces = needed
        return pieces

    raise ConfigurationError(f"unknown local planner kind {kind!r}")


def _antipodal_piece(ctx: LocalContext, e, n_axis, t):
    f, g = ctx.f, ctx.g
    Y = f.target
    thr = ctx.threshold

    def direction(A):
        V = e - (A @ e)[..., None] * A
        return V, np.linalg.norm(V, axis=-1)

    def predicate(X):
        _, n = direction(Y.canonical(f.apply(X)))
        return n > thr

    def section(x):
        a = Y.canonical(f.apply(x))
        V, n = direction(a)
        if n <= 1e-12:
            raise ContractError("antipodal piece evaluated on its excluded axis")
        u = V / n
        return Path(Y, t, Y.exp(a, np.pi * t[:, None] * u))

    return PlannerPiece(f"{ctx.label or 'antipodal'}[axis {n_axis}]", f, g, section, domain=ctx.domain,
                        predicate=predicate, kind=ANTIPODAL_SPHERE,
                        params={"axis": [float(c) for c in e], "threshold": thr})


def single_antipodal_attempt(ctx: LocalContext) -> PlannerPiece:
    """One antipodal rotation piece with no excluded axis (threshold 0): necessarily discontinuous."""
    m = ctx.f.target.coord_dim
    e = np.asarray(ctx.axes[0] if ctx.axes else np.eye(m)[0], dtype=float)
    ctx0 = replace(ctx, threshold=0.0)
    return _antipodal_piece(ctx0, e / np.linalg.norm(e), 0, np.linspace(0.0, 1.0, 17))


# ---------------------------------------------------------------------------
# tube enlargement
# ---------------------------------------------------------------------------

def enlarge_piece(p: PlannerPiece, radius: float, samples: int = 9) -> PlannerPiece:
    """Widen a piece to the open tube of ``radius`` around its domain.

    A point ``x`` of the tube is retracted to its nearest point ``r(x)`` in the
    domain; the section runs ``f`` along the geodesic ``x -> r(x)``, then the
    original section at ``r(x)``, then ``g`` along ``r(x) -> x``.
    """
    if radius == 0:
        return p
    if p.domain is None:
        raise ConfigurationError("only pieces with a submanifold domain can be enlarged")
    if radius < 0:
        raise ConfigurationError("tube radius must be >= 0")
    margin = min(c.injectivity_margin for c in p.domain)
    if radius >= margin:
        raise ConfigurationError(f"tube radius {radius} exceeds the injectivity margin {margin:.4g}")
    M = p.f.source
    f, g = p.f, p.g
    Y = f.target
    inner = p.section

    def section(x):
        x = np.asarray(x, dtype=float)
        r = M.canonical(p.retract(x[None, :])[0])
        if float(M.dist(x, r)) == 0.0:
            return inner(r)
        approach = Path.geodesic(M, x, r, samples)
        a = approach.map(lambda X: Y.canonical(f.apply(X)), Y)
        mid = inner(r)
        back = reverse_path(approach).map(lambda X: Y.canonical(g.apply(X)), Y)
        return concatenate_many([a, mid, back])

    return replace(p, section=section, tube_radius=float(radius), label=f"{p.label}+tube")


# ---------------------------------------------------------------------------
# flow-routed planners
# ---------------------------------------------------------------------------

class _FlowRouter:
    """Caches flow results (and their reparametrizations) per start point."""

    def __init__(self, phi: NavigationFunction, settings: FlowSettings):
        self.phi = phi
        self.settings = settings
        self.cache: dict = {}

    def _key(self, x):
        return np.ascontiguousarray(x, dtype=float).tobytes()

    def prepare(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.ones(len(X), dtype=bool) if self.phi.domain is None else np.asarray(self.phi.domain(X), bool)
        todo = [i for i in np.nonzero(ok)[0] if self._key(X[i]) not in self.cache]
        if todo:
            uniq = {}
            for i in todo:
                uniq.setdefault(self._key(X[i]), i)
            rows = list(uniq.values())
            for i, r in zip(rows, flow_batch(self.phi, X[rows], self.settings)):
                self.cache[self._key(X[i])] = [r, None]

    def flow(self, x) -> FlowResult:
        key = self._key(x)
        if key not in self.cache:
            self.prepare(np.asarray(x)[None, :])
        return self.cache[key][0]

    def reparametrized(self, x) -> Path:
        self.flow(x)
        entry = self.cache[self._key(x)]
        if entry[1] is None:
            entry[1] = arc_length_reparametrize(entry[0], self.phi)
        return entry[1]

    def results(self):
        return [v[0] for v in self.cache.values()]

    def clear(self):
        self.cache.clear()


def _flow_piece(router: _FlowRouter, level: int, local: PlannerPiece, f: MapSpec, g: MapSpec,
                label: str, extra_domain: Optional[Callable] = None) -> PlannerPiece:
    phi = router.phi
    Y = f.target

    def predicate(X):
        X = np.atleast_2d(X)
        ok = np.ones(len(X), dtype=bool) if extra_domain is None else np.asarray(extra_domain(X), bool)
        out = np.zeros(len(X), dtype=bool)
        if not ok.any():
            return out
        router.prepare(X[ok])
        idx = np.nonzero(ok)[0]
        res = [router.flow(X[i]) for i in idx]
        at_level = np.array([r.converged and r.level_index == level for r in res])
        if at_level.any():
            L = np.array([r.limit_point.coords for r, a in zip(res, at_level) if a])
            out[idx[at_level]] = local.contains_many(L)
        return out

    def section(x):
        r = router.flow(x)
        if not r.converged:
            raise ContractError("flow did not converge")
        s = router.reparametrized(x)
        alpha = r.limit_point.coords
        down = s.map(lambda X: Y.canonical(f.apply(X)), Y)
        middle = local.section(alpha)
        up = reverse_path(s).map(lambda X: Y.canonical(g.apply(X)), Y)
        return concatenate_many([down, middle, up])

    return PlannerPiece(label, f, g, section, predicate=predicate, kind="FlowRouted",
                        params={"level": int(level), "local": local.describe()})


def _audit_level_cover(phi: NavigationFunction, level_pieces, resolution: int = 16):
    for i, (lv, pieces) in enumerate(zip(phi.levels, level_pieces)):
        if not pieces:
            raise CoverageError(f"critical level {i} (value {lv.value}) has no local pieces")
        for comp in lv.components:
            P = comp.sample(resolution)
            hit = np.zeros(len(P), dtype=bool)
            for piece in pieces:
                hit |= piece.contains_many(P)
            if not hit.all():
                raise CoverageError(f"local pieces do not cover component {comp.label or comp.kind} "
                                    f"of level {lv.value}")


def build_morse_bott_planner(phi: NavigationFunction, level_pieces: Sequence[Sequence[PlannerPiece]],
                             f: MapSpec, g: MapSpec, settings: FlowSettings = FlowSettings(),
                             name: str = "") -> GeneralizedPlanner:
    """Flow-routed planner with one piece per (critical level, local piece)."""
    if len(level_pieces) != len(phi.levels):
        raise ConfigurationError("need one list of local pieces per critical level")
    if f.source != phi.manifold:
        raise ConfigurationError("maps and navigation function live on different manifolds")
    _audit_level_cover(phi, level_pieces)
    router = _FlowRouter(phi, settings)
    pieces = []
    for i, local_list in enumerate(level_pieces):
        for j, local in enumerate(local_list):
            pieces.append(_flow_piece(router, i, local, f, g, f"level{i}(c={phi.levels[i].value:g})/{local.label}"))
    provenance = {
        "kind": "MorseBott",
        "navigation": phi.kind,
        "levels": [{"value": float(lv.value), "components": len(lv.components), "pieces": len(lp)}
                   for lv, lp in zip(phi.levels, level_pieces)],
    }
    return GeneralizedPlanner(f, g, tuple(pieces), provenance, prepare=router.prepare,
                              flows=router.results, navigation=phi, name=name)


def build_cutlocus_planner(M: ManifoldSpec, N: SubmanifoldSpec, cut: CutLocusDescriptor,
                           pieces_on_N: Sequence[PlannerPiece], pieces_on_cut: Sequence[PlannerPiece],
                           f: MapSpec, g: MapSpec, tube_radius: float | None = None,
                           settings: FlowSettings = FlowSettings(), cut_margin: float = CUT_MARGIN,
                           name: str = "") -> GeneralizedPlanner:
    """Flow pieces on ``M \\ Cut N`` routed onto ``N``, then tube pieces around ``Cut N``."""
    if not pieces_on_N:
        raise ConfigurationError("at least one piece on N is required")
    if cut.pieces and not pieces_on_cut:
        raise ConfigurationError("a non-empty cut locus needs pieces")
    phi = squared_distance_function(M, N, cut, cut_margin)
    _audit_level_cover(phi, [list(pieces_on_N)])
    if cut.pieces:
        S = cut.sample(16)
        hit = np.zeros(len(S), dtype=bool)
        for q in pieces_on_cut:
            hit |= q.contains_many(S)
        if not hit.all():
            raise CoverageError("pieces_on_cut do not cover the cut locus")
    router = _FlowRouter(phi, settings)
    off_cut = phi.domain
    pieces = [_flow_piece(router, 0, local, f, g, f"flow->N/{local.label}", extra_domain=off_cut)
              for local in pieces_on_N]
    if pieces_on_cut:
        if tube_radius is None:
            margin = min(c.injectivity_margin for q in pieces_on_cut for c in q.domain)
            tube_radius = min(0.5, 0.9 * margin)
        if tube_radius <= cut_margin:
            raise ConfigurationError("tube radius must exceed the cut margin or the cover has a gap")
        pieces.extend(enlarge_piece(q, tube_radius) for q in pieces_on_cut)
    provenance = {
        "kind": "CutLocus",
        "pieces_on_N": len(pieces_on_N),
        "pieces_on_cut": len(pieces_on_cut),
        "cut": cut.label,
        "tube_radius": float(tube_radius or 0.0),
    }
    return GeneralizedPlanner(f, g, tuple(pieces), provenance, prepare=router.prepare,
                              flows=router.results, navigation=phi, name=name)


def build_direct_planner(f: MapSpec, g: MapSpec, pieces: Sequence[PlannerPiece], name: str = "") -> GeneralizedPlanner:
    return GeneralizedPlanner(f, g, tuple(pieces), {"kind": "Direct"}, name=name)


def reverse_planner(pl: GeneralizedPlanner) -> GeneralizedPlanner:
    """Swap f and g and reverse every section."""
    pieces = tuple(replace(p, f=p.g, g=p.f, section=(lambda s: lambda x: reverse_path(s(x)))(p.section),
                           label=f"reverse({p.label})") for p in pl.pieces)
    return replace(pl, f=pl.g, g=pl.f, pieces=pieces, name=f"reverse({pl.name})")


def reorder_pieces(pl: GeneralizedPlanner, order: Sequence[int]) -> GeneralizedPlanner:
    if sorted(order) != list(range(pl.piece_count)):
        raise ConfigurationError("order must be a permutation of the piece indices")
    return replace(pl, pieces=tuple(pl.pieces[i] for i in order))


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

def coverage_grid(M: ManifoldSpec, n: int):
    """Deterministic grid with at least ``n`` points (resolution grown per dimension)."""
    res = max(2, int(np.floor(n ** (1.0 / M.dimension))))
    while True:
        G = M.grid(res)
        if len(G) >= n:
            return G
        res += 1


@dataclass
class CoverageReport:
    samples: int
    unclaimed: int
    per_piece: list
    examples: list

    @property
    def ok(self) -> bool:
        return self.unclaimed == 0

    def to_dict(self):
        return {"samples": self.samples, "unclaimed": self.unclaimed, "per_piece": self.per_piece,
                "unclaimed_examples": self.examples, "ok": self.ok}


def coverage_audit(pl: GeneralizedPlanner, samples: int = 10_000) -> CoverageReport:
    G = coverage_grid(pl.source, samples)
    idx = claim_indices(pl, G)
    per = [int(np.sum(idx == j)) for j in range(pl.piece_count)]
    bad = G[idx < 0]
    return CoverageReport(len(G), int(len(bad)), per, [[float(c) for c in x] for x in bad[:5]])


@dataclass
class EndpointReport:
    samples: int
    max_start_error: float
    max_end_error: float
    per_piece: list

    @property
    def ok(self) -> bool:
        return self.max_start_error <= TOL_JOIN and self.max_end_error <= TOL_JOIN

    def to_dict(self):
        return {"samples": self.samples, "max_start_error": self.max_start_error,
                "max_end_error": self.max_end_error, "per_piece": self.per_piece, "ok": self.ok}


def endpoint_audit(pl: GeneralizedPlanner, samples: int = 10_000, seed: int = 0) -> EndpointReport:
    rng = np.random.default_rng(seed)
    X = pl.source.sample(rng, samples)
    planned = plan_many(pl, X, check=False)
    Y = pl.target
    FX = Y.canonical(pl.f.apply(X))
    GX = Y.canonical(pl.g.apply(X))
    starts = np.array([p.start for p, _ in planned])
    ends = np.array([p.end for p, _ in planned])
    e0 = Y.dist(starts, FX)
    e1 = Y.dist(ends, GX)
    per = [int(sum(1 for _, j in planned if j == k)) for k in range(pl.piece_count)]
    return EndpointReport(samples, float(np.max(e0)), float(np.max(e1)), per)


@dataclass
class ContinuityReport:
    pairs: int
    delta: float
    within_piece: int
    cross_piece: int
    k_estimate: float
    k_median: float
    k_max: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"pairs": self.pairs, "delta": self.delta, "within_piece": self.within_piece,
                "cross_piece": self.cross_piece, "k_estimate": self.k_estimate, "k_median": self.k_median,
                "k_max": self.k_max, "violations": len(self.violations),
                "violation_examples": self.violations[:5], "ok": self.ok}


def _random_unit_tangents(M: ManifoldSpec, X, rng):
    V = M.to_tangent(X, rng.standard_normal(X.shape))
    return V / np.linalg.norm(V, axis=-1)[:, None]


def continuity_audit(pl: GeneralizedPlanner, samples: int = 1000, seed: int = 0, delta: float = DELTA,
                     k_max: float = K_MAX, focus=None, focus_directions: int = 8) -> ContinuityReport:
    """Lipschitz-style probe of within-piece continuity on pairs at distance ``delta``.

    Random pairs ``(x, exp_x(delta v))`` are drawn; ``focus`` points add pairs
    ``exp_c(+-delta/2 w)`` straddling each given point.  Pairs claimed by the
    same piece must satisfy ``sup_t d(plan(x)(t), plan(x')(t)) <= K delta``;
    pairs split across pieces are only counted.
    """
    M = pl.source
    rng = np.random.default_rng(seed)
    X = M.sample(rng, samples)
    X2 = M.exp(X, delta * _random_unit_tangents(M, X, rng))
    if focus is not None and len(focus):
        C = np.repeat(np.atleast_2d(np.asarray(focus, dtype=float)), focus_directions, axis=0)
        W = _random_unit_tangents(M, C, rng)
        X = np.vstack([X, M.exp(C, 0.5 * delta * W)])
        X2 = np.vstack([X2, M.exp(C, -0.5 * delta * W)])
    A = claim_indices(pl, np.vstack([X, X2]))
    ia, ib = A[:len(X)], A[len(X):]
    if np.any(A < 0):
        raise CoverageError("continuity audit hit unclaimed points")
    ratios, viol = [], []
    for x, y, ja, jb in zip(X, X2, ia, ib):
        if ja != jb:
            continue
        d = float(M.dist(x, y))
        if d == 0:
            continue
        pa = pl.pieces[ja].section(x)
        pb = pl.pieces[jb].section(y)
        r = sup_distance(pa, pb, RESAMPLE) / d
        ratios.append(r)
        if r > k_max:
            viol.append({"x": [float(c) for c in x], "x_prime": [float(c) for c in y],
                         "piece": int(ja), "ratio": float(r)})
    ratios = np.array(ratios) if ratios else np.zeros(1)
    return ContinuityReport(int(len(X)), float(delta), int(np.sum(ia == ib)), int(np.sum(ia != ib)),
                            float(np.max(ratios)), float(np.median(ratios)), float(k_max), viol)
