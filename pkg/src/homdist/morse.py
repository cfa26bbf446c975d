"""Morse-Bott navigation functions and their negative gradient flows.

The integrator is classical RK4 with step halving whenever a step would
increase the function value.  It runs on batches of start points (one
``(k, coord_dim)`` array) so audits over thousands of starts stay cheap;
:func:`negative_gradient_flow` is the single-point wrapper.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, ContractError
from .manifold import Circle, ManifoldSpec, Path, Point, Product, Torus, TangentVector
from .submanifold import Diagonal, SubmanifoldSpec

TORUS_COSINE = "TorusCosine"
SQUARED_DISTANCE = "SquaredDistanceToSubmanifold"
CUSTOM = "Custom"


@dataclass(frozen=True)
class FlowSettings:
    step: float = 0.1
    g_tol: float = 1e-8
    max_steps: int = 10 ** 6
    snap_tol: float = 1e-4
    unstable_tol: float = 1e-7
    # allowed per-step increase of the value (round-off only)
    mono_tol: float = 1e-12
    batch: int = 2048


@dataclass(frozen=True)
class CriticalLevel:
    value: float
    components: tuple
    indices: tuple

    def __post_init__(self):
        if len(self.components) != len(self.indices):
            raise ConfigurationError("one index per critical component is required")
        if any(i < 0 for i in self.indices):
            raise ConfigurationError("Morse-Bott indices are non-negative")


@dataclass(frozen=True, eq=False)
class NavigationFunction:
    manifold: ManifoldSpec
    value: Callable
    gradient: Callable
    levels: tuple
    kind: str = CUSTOM
    domain: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = [lv.value for lv in self.levels]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigurationError("critical levels must be sorted by strictly increasing value")

    def components(self):
        """Flat list of ``(level_index, component_index, submanifold, morse_index)``."""
        return [(i, j, c, idx)
                for i, lv in enumerate(self.levels)
                for j, (c, idx) in enumerate(zip(lv.components, lv.indices))]

    def value_at(self, x: Point) -> float:
        return float(self.value(x.coords))

    def gradient_at(self, x: Point) -> TangentVector:
        return TangentVector(x, self.gradient(x.coords))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "manifold": str(self.manifold),
            "levels": [{"value": float(lv.value), "indices": list(lv.indices),
                        "components": [c.describe() for c in lv.components]} for lv in self.levels],
            **self.params,
        }


@dataclass(frozen=True, eq=False)
class FlowResult:
    trajectory: Path
    limit_point: Point
    level_index: int
    component_index: int
    converged: bool
    ambiguous: bool
    flow_time: float
    steps: int

    @property
    def start(self) -> np.ndarray:
        return self.trajectory.start


def torus_cosine(factor: ManifoldSpec | int = 2, shift=None) -> NavigationFunction:
    """``Phi(x, y) = sum_i (1 - cos(x_i - y_i - shift_i))`` on ``T^n x T^n``.

    Critical set: ``x - y - shift`` in ``{0, pi}^n``; the level ``2k`` holds
    one shifted diagonal per choice of ``k`` coordinates equal to ``pi``,
    each of Morse-Bott index ``k``.
    """
    if isinstance(factor, int):
        factor = Circle() if factor == 1 else Torus(factor)
    if not factor.is_flat_torus or factor.kind == "Product":
        raise ConfigurationError("torus_cosine needs a Circle or Torus(n) factor")
    n = factor.coord_dim
    M = Product(factor, factor)
    shift = np.zeros(n) if shift is None else np.asarray(shift, dtype=float).reshape(n)

    def value(X):
        X = np.asarray(X, dtype=float)
        u = X[..., :n] - X[..., n:] - shift
        return np.sum(1.0 - np.cos(u), axis=-1)

    def gradient(X):
        X = np.asarray(X, dtype=float)
        s = np.sin(X[..., :n] - X[..., n:] - shift)
        return np.concatenate([s, -s], axis=-1)

    levels = []
    for k in range(n + 1):
        comps, idx = [], []
        for S in itertools.combinations(range(n), k):
            u = np.zeros(n)
            u[list(S)] = np.pi
            comps.append(Diagonal(M, offset=u + shift, label=f"u={_fmt_offset(u)}"))
            idx.append(k)
        levels.append(CriticalLevel(2.0 * k, tuple(comps), tuple(idx)))
    return NavigationFunction(M, value, gradient, tuple(levels), kind=TORUS_COSINE,
                              params={"shift": [float(s) for s in shift]})


def _fmt_offset(u):
    return "(" + ",".join("pi" if abs(c - np.pi) < 1e-12 else f"{c:g}" for c in u) + ")"


# ---------------------------------------------------------------------------
# flow
# ---------------------------------------------------------------------------

def _nearest_component(phi: NavigationFunction, X, only_positive=False):
    comps = [c for c in phi.components() if not only_positive or c[3] > 0]
    if not comps:
        k = len(X)
        return np.full(k, np.inf), np.full(k, -1), []
    D = np.stack([c[2].distance(X) for c in comps], axis=-1)
    best = np.argmin(D, axis=-1)
    return D[np.arange(len(X)), best], best, comps


def flow_batch(phi: NavigationFunction, X0, settings: FlowSettings = FlowSettings()) -> list[FlowResult]:
    """Run the negative gradient flow from every row of ``X0``."""
    M = phi.manifold
    X0 = M.canonical(np.atleast_2d(np.asarray(X0, dtype=float)))
    out = []
    for i in range(0, len(X0), settings.batch):
        out.extend(_flow_chunk(phi, X0[i:i + settings.batch], settings))
    return out


def _flow_chunk(phi, X0, cfg: FlowSettings):
    M = phi.manifold
    k = len(X0)
    if phi.domain is not None:
        bad = ~np.asarray(phi.domain(X0), dtype=bool)
        if bad.any():
            from .errors import DomainError
            raise DomainError(f"{int(bad.sum())} start point(s) outside the flow domain")
    X = X0.copy()
    h = np.full(k, float(cfg.step))
    t = np.zeros(k)
    steps = np.zeros(k, dtype=int)
    active = np.ones(k, dtype=bool)
    small_grad = np.zeros(k, dtype=bool)
    stalled = np.zeros(k, dtype=bool)
    unstable = np.full(k, -1)
    positive = [c for c in phi.components() if c[3] > 0]

    def check_unstable(idx):
        if not positive or len(idx) == 0:
            return
        D = np.stack([c[2].distance(X[idx]) for c in positive], axis=-1)
        best = np.argmin(D, axis=-1)
        hit = D[np.arange(len(idx)), best] < cfg.unstable_tol
        unstable[idx[hit]] = best[hit]
        active[idx[hit]] = False

    check_unstable(np.arange(k))
    hist_X, hist_acc = [X.copy()], [np.ones(k, dtype=bool)]
    hist_t = [t.copy()]

    def f(Y):
        return -phi.gradient(Y)

    it = 0
    while active.any():
        it += 1
        idx = np.nonzero(active)[0]
        Xa = X[idx]
        k1 = f(Xa)
        gn = np.linalg.norm(k1, axis=-1)
        done = gn < cfg.g_tol
        small_grad[idx[done]] = True
        active[idx[done]] = False
        over = steps[idx] >= cfg.max_steps
        active[idx[over]] = False
        keep = ~done & ~over
        idx, Xa, k1 = idx[keep], Xa[keep], k1[keep]
        if len(idx) == 0:
            break
        ha = h[idx][:, None]
        k2 = f(M.canonical(Xa + 0.5 * ha * k1))
        k3 = f(M.canonical(Xa + 0.5 * ha * k2))
        k4 = f(M.canonical(Xa + ha * k3))
        Xn = M.canonical(Xa + ha / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        v_old = phi.value(Xa)
        v_new = phi.value(Xn)
        ok = v_new <= v_old + cfg.mono_tol
        rej = idx[~ok]
        h[rej] *= 0.5
        tiny = rej[h[rej] < 1e-14]
        stalled[tiny] = True
        active[tiny] = False
        acc_idx = idx[ok]
        X[acc_idx] = Xn[ok]
        t[acc_idx] += h[acc_idx]
        steps[acc_idx] += 1
        acc = np.zeros(k, dtype=bool)
        acc[acc_idx] = True
        check_unstable(acc_idx)
        if acc.any():
            hist_X.append(X.copy())
            hist_acc.append(acc)
            hist_t.append(t.copy())

    HX = np.stack(hist_X)
    HA = np.stack(hist_acc)
    HT = np.stack(hist_t)

    near_d, near_j, comps = _nearest_component(phi, X)
    results = []
    for i in range(k):
        traj_X = HX[HA[:, i], i]
        traj_t = HT[HA[:, i], i]
        total = float(t[i])
        if total > 0:
            traj = Path._trusted(M, traj_t / total, traj_X)
        else:
            traj = Path.constant(M, X0[i])
        ambiguous = unstable[i] >= 0
        if ambiguous:
            lvl, comp_j, comp, _ = positive[unstable[i]]
            converged = True
        elif small_grad[i] and near_d[i] < cfg.snap_tol:
            lvl, comp_j, comp, _ = comps[near_j[i]]
            converged = True
        else:
            lvl, comp_j, comp, converged = -1, -1, None, False
        if converged:
            limit = M.canonical(comp.project(X[i]))
        else:
            limit = X[i]
        results.append(FlowResult(traj, Point(M, limit), int(lvl), int(comp_j), bool(converged),
                                  bool(ambiguous), total, int(steps[i])))
    return results


def negative_gradient_flow(phi: NavigationFunction, x, cfg: FlowSettings = FlowSettings()) -> FlowResult:
    """Flow ``x' = -grad Phi(x)`` from ``x`` until ``|grad Phi| < g_tol``, then snap to the critical set.

    Starts (or trajectories) passing within ``unstable_tol`` of a component of
    positive index stop there with ``ambiguous=True``.
    """
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    if isinstance(x, Point) and x.manifold != phi.manifold:
        raise ConfigurationError("start point is not on the navigation function's manifold")
    return flow_batch(phi, coords[None, :], cfg)[0]


def basin_assignment(phi: NavigationFunction, x, cfg: FlowSettings = FlowSettings()) -> tuple[int, int]:
    r = negative_gradient_flow(phi, x, cfg)
    if not r.converged:
        raise ContractError("gradient flow did not converge; basin undefined")
    return r.level_index, r.component_index


def arc_length_reparametrize(r: FlowResult, phi: NavigationFunction) -> Path:
    """Reparametrize a converged flow by arc length ``s`` and append the snap segment.

    The result reaches the critical set at parameter 1.
    """
    if not r.converged:
        raise ContractError("cannot reparametrize a non-converged flow")
    M = phi.manifold
    X = r.trajectory.coords
    # discrete arc length of the sampled trajectory; converges to int |grad Phi| dt
    ds = M.dist(X[:-1], X[1:])
    limit = r.limit_point.coords
    snap = float(M.dist(X[-1], limit))
    s = np.concatenate([[0.0], np.cumsum(ds)])
    pts = X
    if snap > 0:
        s = np.append(s, s[-1] + snap)
        pts = np.vstack([X, limit])
    keep = np.concatenate([[True], np.diff(s) > 0])
    s, pts = s[keep], pts[keep]
    if len(s) < 2 or s[-1] <= 0:
        return Path(M, np.array([0.0, 1.0]), np.stack([X[0], limit]))
    s = s / s[-1]
    s[-1] = 1.0
    return Path(M, s, pts)


def flow_arc_length(r: FlowResult, phi: NavigationFunction) -> float:
    """Unnormalized ``s`` at the end of the reparametrized flow (including the snap)."""
    M = phi.manifold
    X = r.trajectory.coords
    return float(np.sum(M.dist(X[:-1], X[1:])) + M.dist(X[-1], r.limit_point.coords))


def max_value_increase(r: FlowResult, phi: NavigationFunction) -> float:
    """Largest per-step increase of Phi along the trajectory (<= 0 for a monotone run)."""
    v = phi.value(r.trajectory.coords)
    if len(v) < 2:
        return 0.0
    return float(np.max(np.diff(v)))


def audit_critical_levels(phi: NavigationFunction, samples: int = 200, seed: int = 0,
                          g_tol: float = FlowSettings.g_tol, resolution: int = 16) -> dict:
    """Sampling audit of declared critical data.

    Checks that the gradient vanishes on every declared component, that the
    value there equals the declared level, and that random points away from
    all components are regular (``|grad| > 10 g_tol``).
    """
    M = phi.manifold
    worst_grad, worst_value = 0.0, 0.0
    for lv in phi.levels:
        for comp in lv.components:
            P = comp.sample(resolution)
            worst_grad = max(worst_grad, float(np.max(np.linalg.norm(phi.gradient(P), axis=-1))))
            worst_value = max(worst_value, float(np.max(np.abs(phi.value(P) - lv.value))))
    rng = np.random.default_rng(seed)
    X = M.sample(rng, samples)
    if phi.domain is not None:
        X = X[np.asarray(phi.domain(X), dtype=bool)]
    all_comps = [c[2] for c in phi.components()]
    far = np.min(np.stack([c.distance(X) for c in all_comps], axis=-1), axis=-1) > 1e-3
    regular = np.linalg.norm(phi.gradient(X[far]), axis=-1)
    min_regular = float(np.min(regular)) if len(regular) else float("inf")
    return {
        "critical_values": [float(lv.value) for lv in phi.levels],
        "max_grad_on_levels": worst_grad,
        "max_value_error_on_levels": worst_value,
        "min_grad_off_levels": min_regular,
        "ok": worst_grad < g_tol and worst_value < 1e-9 and min_regular > 10 * g_tol,
    }
