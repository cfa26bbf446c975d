"""Build a planner from a scenario config, audit it and export the report."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..cutlocus import GridSpec, cut_locus_analytic, detect_separation_points
from ..distance import (
    REFERENCES, BoundReport, check_cutlocus_inequality, check_morse_bott_inequality,
    upper_bound_from_planner, weak_category_sequence,
)
from ..errors import AuditError, ConfigurationError
from ..manifold import Path, hausdorff, wrap_diff, write_path_csv, write_points_csv
from ..morse import (
    FlowSettings, audit_critical_levels, flow_arc_length, flow_batch, max_value_increase, torus_cosine,
)
from ..planner import (
    GeneralizedPlanner, LocalContext, build_cutlocus_planner, build_direct_planner,
    build_morse_bott_planner, claim_indices, continuity_audit, coverage_audit, endpoint_audit,
    enlarge_piece, projection_first, projection_second, single_antipodal_attempt,
    standard_local_planners,
)
from ..submanifold import AntipodalGraph, Diagonal, SinglePoint, whole
from .apps import build_fibration_planner, build_workmap_planner
from .config import Expr, ScenarioConfig, parse_expr, parse_list

MONOTONE_TOL = 1e-9
SNAP_REPORT_TOL = 1e-3
ARC_SLACK = 0.01
LIFT_TOL = 1e-9
EXEMPLAR_POOL = 256


@dataclass
class ScenarioReport:
    config: ScenarioConfig
    data: dict
    failures: list = field(default_factory=list)
    planner: Optional[GeneralizedPlanner] = None
    exemplars: list = field(default_factory=list)
    point_sets: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


# ---------------------------------------------------------------------------
# planner construction
# ---------------------------------------------------------------------------

def _kinds(text, what):
    items = parse_list(text)
    out = []
    for it in items:
        if not isinstance(it, Expr) or it.args:
            raise ConfigurationError(f"{what}: expected piece kind names")
        out.append(it.name)
    return out


def tc_torus_planner(n: int, kind: str = "Translation", name: str = "") -> GeneralizedPlanner:
    """Morse-Bott TC planner of ``T^n`` from the cosine navigation function."""
    phi = torus_cosine(n)
    M = phi.manifold
    f, g = projection_first(M), projection_second(M)
    lp = [standard_local_planners(kind, LocalContext(f, g, lv.components, label=f"c={lv.value:g}"))
          for lv in phi.levels]
    return build_morse_bott_planner(phi, lp, f, g, name=name)


def _morse_bott(cfg: ScenarioConfig):
    nav = cfg.expr("navigation")
    if not isinstance(nav, Expr) or nav.name != "TorusCosine" or len(nav.args) != 1:
        raise ConfigurationError("MorseBott recipes support navigation = TorusCosine(n)")
    phi = torus_cosine(int(nav.args[0]))
    M = phi.manifold
    if cfg.manifold is not None and cfg.manifold != M:
        raise ConfigurationError(f"navigation function lives on {M}, config declares {cfg.manifold}")
    f = cfg.f or projection_first(M)
    g = cfg.g or projection_second(M)
    kinds = _kinds(cfg.get("level_pieces", "Translation"), "level_pieces")
    if len(kinds) == 1:
        kinds = kinds * len(phi.levels)
    if len(kinds) != len(phi.levels):
        raise ConfigurationError(f"level_pieces lists {len(kinds)} kinds for {len(phi.levels)} levels")
    lp = [standard_local_planners(k, LocalContext(f, g, lv.components, label=f"c={lv.value:g}"))
          for k, lv in zip(kinds, phi.levels)]
    return build_morse_bott_planner(phi, lp, f, g, name=cfg.name), {"navigation": phi}


def _submanifold(cfg: ScenarioConfig, M):
    e = cfg.expr("submanifold")
    if not isinstance(e, Expr):
        raise ConfigurationError("submanifold must be a catalog expression")
    if e.name == "SinglePoint":
        return SinglePoint(M, [float(a) for a in e.args], label="N")
    if e.name == "Diagonal":
        return Diagonal(M, [float(a) for a in e.args] if e.args else None, label="diagonal")
    if e.name == "AntipodalGraph" and not e.args:
        return AntipodalGraph(M, label="antipodal graph")
    if e.name == "Whole" and not e.args:
        return whole(M)
    raise ConfigurationError(f"unknown submanifold kind {str(e)!r}")


def _cut_locus(cfg: ScenarioConfig):
    M = cfg.manifold
    if M is None or cfg.f is None:
        raise ConfigurationError("CutLocus recipes need manifold, f and g")
    N = _submanifold(cfg, M)
    cut = cut_locus_analytic(M, N)
    if not cut.supported:
        raise ConfigurationError(f"no analytic cut locus for {N.kind} in {M}")
    f, g = cfg.f, cfg.g
    kn = _kinds(cfg.get("pieces_on_N", "Geodesic"), "pieces_on_N")
    pn = [p for k in kn for p in standard_local_planners(k, LocalContext(f, g, (N,), label="N"))]
    pc, ctx = [], None
    if cut.pieces:
        if "pieces_on_cut" not in cfg.entries:
            raise ConfigurationError("the cut locus is non-empty: pieces_on_cut is required")
        ctx = LocalContext(f, g, cut.pieces, label="cut")
        pc = [p for k in _kinds(cfg.get("pieces_on_cut"), "pieces_on_cut")
              for p in standard_local_planners(k, ctx)]
    radius = cfg.number("tube_radius")
    pl = build_cutlocus_planner(M, N, cut, pn, pc, f, g, tube_radius=radius, name=cfg.name)
    extra = {"submanifold": N, "cut": cut, "navigation": pl.navigation}
    attempt = cfg.get("attempt")
    if attempt is not None:
        if attempt != "SingleAntipodal" or ctx is None:
            raise ConfigurationError("attempt = SingleAntipodal needs an antipodal cut locus")
        one = enlarge_piece(single_antipodal_attempt(ctx), pl.provenance["tube_radius"])
        bad = GeneralizedPlanner(f, g, (pl.pieces[0], one), {"kind": "CutLocus", "pieces_on_N": 1,
                                                             "pieces_on_cut": 1}, prepare=pl.prepare,
                                 flows=pl.flows, navigation=pl.navigation, name=f"{cfg.name}-single")
        e = np.asarray(one.params["axis"])
        extra["attempt"] = bad
        extra["focus"] = _axis_focus(M, e)
    return pl, extra


def _axis_focus(M, e):
    """Points of the antipodal graph where an axis-based rotation degenerates."""
    return np.array([np.concatenate([e, -e]), np.concatenate([-e, e])])


def _direct(cfg: ScenarioConfig):
    M = cfg.manifold
    if M is None or cfg.f is None:
        raise ConfigurationError("Direct recipes need manifold, f and g")
    ctx = LocalContext(cfg.f, cfg.g, (whole(M),), label="direct")
    pieces = [p for k in _kinds(cfg.get("pieces", "Geodesic"), "pieces") for p in standard_local_planners(k, ctx)]
    return build_direct_planner(cfg.f, cfg.g, pieces, name=cfg.name), {}


def _workmap(cfg: ScenarioConfig):
    links = parse_list(cfg.get("links", "1, 1"))
    if len(links) != 2 or any(isinstance(v, Expr) for v in links) or min(links) <= 0:
        raise ConfigurationError("links must be two positive numbers")
    base = tc_torus_planner(2, name="tc_torus2")
    pl = build_workmap_planner(links, base)
    pl = replace(pl, name=cfg.name)
    return pl, {"base": base, "navigation": base.navigation}


def _fibration(cfg: ScenarioConfig):
    from ..manifold import Torus
    idx = int(cfg.number("fiber", 0))
    base = tc_torus_planner(1, name="tc_circle")
    X = Torus(2)
    pl = build_fibration_planner(base, X, idx)
    if cfg.manifold is not None and cfg.manifold != pl.source:
        raise ConfigurationError(f"fibration planner lives on {pl.source}, config declares {cfg.manifold}")
    return pl, {"base": base, "navigation": base.navigation, "fiber": idx}


BUILDERS = {
    "MorseBott": _morse_bott,
    "CutLocus": _cut_locus,
    "Direct": _direct,
    "Workmap": _workmap,
    "Fibration": _fibration,
}


def build_planner(cfg: ScenarioConfig):
    """``(planner, extras)`` for planner recipes."""
    if cfg.recipe not in BUILDERS:
        raise ConfigurationError(f"recipe {cfg.recipe} does not build a planner")
    return BUILDERS[cfg.recipe](cfg)


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

def flow_statistics(phi, samples: int, seed: int, N=None) -> dict:
    rng = np.random.default_rng(seed)
    X = phi.manifold.sample(rng, samples)
    if phi.domain is not None:
        X = X[np.asarray(phi.domain(X), dtype=bool)]
    res = flow_batch(phi, X, FlowSettings())
    conv = [r for r in res if r.converged]
    out = {
        "starts": len(res),
        "converged": len(conv),
        "ambiguous": int(sum(r.ambiguous for r in res)),
        "max_value_increase": max((max_value_increase(r, phi) for r in res), default=0.0),
        "max_steps": max((r.steps for r in res), default=0),
        "limit_levels": {str(float(lv.value)): int(sum(r.level_index == i for r in conv))
                         for i, lv in enumerate(phi.levels)},
    }
    if N is not None:
        last = np.array([r.trajectory.end for r in res])
        out["max_final_distance_to_N"] = float(np.max(N.distance(last))) if len(res) else 0.0
        excess = [flow_arc_length(r, phi) - float(N.distance(r.start)) for r in conv]
        out["max_arc_length_excess"] = max(excess, default=0.0)
    return out


def exemplar_pool(pl: GeneralizedPlanner, extras: dict, seed: int):
    rng = np.random.default_rng(seed + 7)
    parts = [pl.source.sample(rng, EXEMPLAR_POOL)]
    for p in pl.pieces:
        if p.domain is not None:
            parts.extend(c.sample(8) for c in p.domain)
    phi = extras.get("navigation")
    if phi is not None:
        for lv in phi.levels:
            for c in lv.components:
                S = c.sample(8)
                if phi.manifold == pl.source:
                    parts.append(S)
                elif pl.provenance.get("kind") == "Fibration":
                    k = extras["fiber"]
                    Z = np.full((len(S), pl.source.coord_dim), 0.5)
                    Z[:, k] = S[:, 0]
                    Z[:, -1] = S[:, 1]
                    parts.append(Z)
    return pl.source.canonical(np.concatenate(parts))


def exemplars(pl: GeneralizedPlanner, extras: dict, seed: int):
    P = exemplar_pool(pl, extras, seed)
    idx = claim_indices(pl, P)
    out = []
    for j in range(pl.piece_count):
        hit = np.nonzero(idx == j)[0]
        if len(hit):
            x = P[hit[0]]
            out.append((x, pl.pieces[j].section(x)))
        else:
            out.append((None, None))
    return out


def lift_audit(pl: GeneralizedPlanner, samples: int, seed: int, index: int) -> dict:
    rng = np.random.default_rng(seed + 3)
    Z = pl.source.sample(rng, samples)
    idx = claim_indices(pl, Z)
    n = pl.source.factors[0].coord_dim
    worst_proj, worst_start = 0.0, 0.0
    for z, j in zip(Z, idx):
        piece = pl.pieces[j]
        base = piece.section(z)
        lifted = piece.lift(z)
        worst_proj = max(worst_proj, float(np.max(np.abs(wrap_diff(lifted.coords[:, index] - base.coords[:, 0])))))
        worst_start = max(worst_start, float(pl.source.factors[0].dist(lifted.start, z[:n])))
    return {"samples": int(samples), "max_projection_error": worst_proj, "max_lift_start_error": worst_start,
            "ok": worst_proj <= LIFT_TOL and worst_start <= LIFT_TOL}


def _reference_key(cfg: ScenarioConfig):
    ref = cfg.get("reference")
    if ref is None:
        return None
    e = parse_expr(ref)
    if not isinstance(e, Expr) or len(e.args) != 1 or not isinstance(e.args[0], Expr):
        raise ConfigurationError("reference must look like TC(S2)")
    key = (e.name, e.args[0].name)
    if REFERENCES.lookup(*key) is None:
        raise ConfigurationError(f"no reference value for {ref}")
    return key


def _planner_report(cfg: ScenarioConfig, rep: ScenarioReport):
    pl, extras = build_planner(cfg)
    rep.planner = pl
    seed = cfg.seed
    fail = rep.failures
    audits = {}

    cov = coverage_audit(pl, cfg.samples)
    audits["coverage"] = cov.to_dict()
    if not cov.ok:
        fail.append(("coverage", f"{cov.unclaimed} of {cov.samples} grid points unclaimed"))

    if cov.ok:
        end = endpoint_audit(pl, cfg.samples, seed)
        audits["endpoint_contract"] = end.to_dict()
        if not end.ok:
            fail.append(("endpoint_contract",
                         f"endpoint errors {end.max_start_error:.2e}, {end.max_end_error:.2e}"))
        cont = continuity_audit(pl, cfg.continuity_samples, seed + 1, focus=extras.get("focus"))
        audits["continuity"] = cont.to_dict()

    phi = extras.get("navigation")
    if phi is not None:
        N = extras.get("submanifold")
        fs = flow_statistics(phi, cfg.flow_samples, seed + 2, N)
        audits["flows"] = fs
        if fs["converged"] != fs["starts"]:
            fail.append(("flow_convergence", f"{fs['starts'] - fs['converged']} flows did not converge"))
        if fs["max_value_increase"] > MONOTONE_TOL:
            fail.append(("phi_monotonicity", f"value increased by {fs['max_value_increase']:.2e}"))
        if N is not None:
            if fs["max_final_distance_to_N"] > SNAP_REPORT_TOL:
                fail.append(("flow_convergence", "flow stopped away from N"))
            if fs["max_arc_length_excess"] > ARC_SLACK:
                fail.append(("arc_length", f"excess {fs['max_arc_length_excess']:.3g}"))
        if cfg.recipe == "MorseBott":
            crit = audit_critical_levels(phi, samples=200, seed=seed)
            audits["critical_levels"] = crit
            if not crit["ok"]:
                fail.append(("critical_levels", "declared critical data failed the audit"))

    if "attempt" in extras:
        bad = continuity_audit(extras["attempt"], 50, seed + 4, focus=extras["focus"], focus_directions=16)
        good = continuity_audit(pl, 50, seed + 4, focus=extras["focus"], focus_directions=16)
        audits["single_piece_attempt"] = {"attempt": bad.to_dict(), "planner": good.to_dict(),
                                          "rejected": not bad.ok}
        if bad.ok:
            fail.append(("antipodal_attempt_rejected", "no discontinuity found for the one-piece attempt"))

    if pl.provenance.get("kind") == "Fibration":
        la = lift_audit(pl, cfg.samples, seed, extras["fiber"])
        audits["lift"] = la
        if not la["ok"]:
            fail.append(("lift_projection", f"projection error {la['max_projection_error']:.2e}"))

    ref = _reference_key(cfg)
    kind = pl.provenance.get("kind")
    coverage = cov if cov.ok else None
    if kind == "MorseBott":
        b = check_morse_bott_inequality(pl, cfg.name, ref, coverage)
    elif kind == "CutLocus":
        b = check_cutlocus_inequality(pl, cfg.name, ref, coverage)
    else:
        ub = pl.piece_count - 1 if coverage is None else upper_bound_from_planner(pl, coverage)
        value = REFERENCES.lookup(*ref) if ref else None
        b = BoundReport(cfg.name, ub, [], ub, True, value.value if value else None,
                        value.provenance if value else "", {"construction": kind})
    if not b.inequality_holds:
        fail.append(("bound_inequality", f"bound {b.upper_bound} exceeds {b.theorem_form_rhs}"))
    rep.data["bounds"] = [b.to_dict()]
    rep.data["planner"] = pl.describe()
    rep.data["audits"] = audits
    rep.exemplars = exemplars(pl, extras, seed) if cov.ok else []
    rep.data["exemplars"] = [None if x is None else {"piece": j, "x": [float(c) for c in x]}
                             for j, (x, _) in enumerate(rep.exemplars)]


def _cut_detect_report(cfg: ScenarioConfig, rep: ScenarioReport):
    M = cfg.manifold
    if M is None:
        raise ConfigurationError("CutDetect recipes need a manifold")
    N = _submanifold(cfg, M)
    res = int(cfg.number("grid_resolution", 200))
    tol = cfg.number("hausdorff_tol", 0.05)
    cut = cut_locus_analytic(M, N)
    if not cut.supported:
        raise ConfigurationError(f"no analytic cut locus for {N.kind} in {M}")
    P = detect_separation_points(M, N, GridSpec(resolution=res))
    A = cut.sample(res)
    h = hausdorff(M, P, A) if len(P) and len(A) else (0.0 if len(P) == len(A) else float("inf"))
    rep.data["detection"] = {"grid_resolution": res, "detected": int(len(P)), "analytic_samples": int(len(A)),
                             "hausdorff": float(h), "tolerance": tol, "cut": cut.describe()}
    if not h <= tol:
        rep.failures.append(("hausdorff", f"detected set is {h:.3g} from the analytic cut locus"))
    rep.point_sets["separation_points"] = P
    rep.point_sets["analytic_cut"] = A


def _weak_category_report(cfg: ScenarioConfig, rep: ScenarioReport):
    degrees = [int(d) for d in parse_list(cfg.get("degrees", "0, 1, 2, -1, 5"))]
    kmax = int(cfg.number("kmax", 10))
    rows = []
    for d in degrees:
        seq = weak_category_sequence(d, kmax)
        mono = all(b <= a for a, b in zip(seq, seq[1:]))
        rows.append({"degree": d, "value": seq[-1], "sequence": seq, "non_increasing": mono})
        if not mono:
            rep.failures.append(("monotone_iterates", f"degree {d}: {seq}"))
    rep.data["weak_category"] = rows
    if "expected" in cfg.entries:
        exp = [int(v) for v in parse_list(cfg.get("expected"))]
        got = [r["value"] for r in rows]
        rep.data["expected"] = exp
        if exp != got:
            rep.failures.append(("expected_values", f"expected {exp}, got {got}"))


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return v
    return v


def run_scenario(cfg: ScenarioConfig, out: str | None = None, strict: bool = True,
                 with_audits: bool = True) -> ScenarioReport:
    """Build, audit and (optionally) export one scenario.

    With ``strict`` a hard audit failure raises :class:`AuditError` naming the
    invariant (after exporting, so the report is still on disk).
    """
    rep = ScenarioReport(cfg, {"scenario": cfg.name, "recipe": cfg.recipe, "config": cfg.echo()})
    if cfg.get("description"):
        rep.data["description"] = cfg.get("description")
    if cfg.recipe in BUILDERS:
        _planner_report(cfg, rep)
    elif cfg.recipe == "CutDetect":
        _cut_detect_report(cfg, rep)
    elif cfg.recipe == "WeakCategory":
        _weak_category_report(cfg, rep)
    rep.data["failures"] = [{"invariant": a, "message": m} for a, m in rep.failures]
    rep.data["passed"] = rep.passed
    target = out or cfg.out
    if target:
        export_report(rep, target)
    if strict and rep.failures:
        inv, msg = rep.failures[0]
        raise AuditError(inv, msg)
    return rep


def planned_file_names(rep: ScenarioReport) -> list[str]:
    names = ["report.json"]
    names += [f"path_piece{j}.csv" for j, (x, _) in enumerate(rep.exemplars) if x is not None]
    names += [f"{k}.csv" for k in sorted(rep.point_sets)]
    return names


def export_paths(rep: ScenarioReport, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for j, (x, path) in enumerate(rep.exemplars):
        if x is None:
            continue
        name = f"path_piece{j}.csv"
        write_path_csv(path, os.path.join(out_dir, name))
        names.append(name)
    for k in sorted(rep.point_sets):
        name = f"{k}.csv"
        write_points_csv(rep.point_sets[k], os.path.join(out_dir, name))
        names.append(name)
    return names


def report_json(rep: ScenarioReport) -> str:
    return json.dumps(_clean(rep.data), sort_keys=True, indent=2) + "\n"


def export_report(rep: ScenarioReport, out_dir) -> list[str]:
    """Write ``report.json`` plus path / point-cloud CSVs; returns the manifest."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out_dir}: {exc}") from None
    rep.files = planned_file_names(rep)
    rep.data["files"] = rep.files
    export_paths(rep, out_dir)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report_json(rep))
    return list(rep.files)
