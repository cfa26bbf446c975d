"""Homotopic-distance bookkeeping.

Planners give upper bounds ``D(f, g) <= pieces - 1``.  The checkers here
assemble the right-hand sides of the Morse-Bott and cut-locus inequalities
from a planner's provenance and compare them with what the planner achieved.
Lower bounds are never computed; the reference table records known values
together with where they come from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AuditError, ConfigurationError
from .planner import CoverageReport, GeneralizedPlanner

WINDING_SAMPLES = 1000


@dataclass(frozen=True)
class ReferenceEntry:
    value: int
    provenance: str
    note: str = ""


@dataclass(frozen=True)
class ReferenceTable:
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, e in self.entries.items():
            if not isinstance(e, ReferenceEntry) or not e.provenance:
                raise ConfigurationError(f"reference {key} has no provenance")

    def lookup(self, invariant: str, space: str) -> Optional[ReferenceEntry]:
        return self.entries.get((invariant, space))


REFERENCES = ReferenceTable({
    ("TC", "S1"): ReferenceEntry(1, "derived", "D(p1,p2)=0 would make S1 contractible"),
    ("TC", "T2"): ReferenceEntry(2, "derived", "zero-divisor cup length of T2 is 2"),
    ("TC", "S2"): ReferenceEntry(2, "published", "TC(S^n)=2 for n even"),
    ("cat", "S2"): ReferenceEntry(1, "derived", "a one-piece planner would contract S2"),
    ("cat", "S1"): ReferenceEntry(1, "derived", "S1 is not contractible"),
})


@dataclass
class BoundReport:
    label: str
    upper_bound: int
    per_level_terms: list
    theorem_form_rhs: int
    inequality_holds: bool
    reference_value: Optional[int] = None
    reference_provenance: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.upper_bound < 0:
            raise ConfigurationError("upper bound must be >= 0")

    @property
    def matches_reference(self) -> Optional[bool]:
        if self.reference_value is None:
            return None
        return self.upper_bound == self.reference_value

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "upper_bound": self.upper_bound,
            "per_level_terms": [[float(a), int(b)] for a, b in self.per_level_terms],
            "theorem_form_rhs": self.theorem_form_rhs,
            "inequality_holds": self.inequality_holds,
            "reference_value": self.reference_value,
            "reference_provenance": self.reference_provenance,
            "matches_reference": self.matches_reference,
            **self.extras,
        }


def upper_bound_from_planner(pl: GeneralizedPlanner, coverage: CoverageReport | None = None) -> int:
    """``pieces - 1``; refuses when a supplied coverage audit failed."""
    if coverage is not None and not coverage.ok:
        raise AuditError("coverage", f"{coverage.unclaimed} of {coverage.samples} grid points are unclaimed")
    return pl.piece_count - 1


def _reference(reference):
    if reference is None:
        return None, ""
    if isinstance(reference, ReferenceEntry):
        return reference.value, reference.provenance
    e = REFERENCES.lookup(*reference)
    if e is None:
        raise ConfigurationError(f"no reference value for {reference}")
    return e.value, e.provenance


def check_morse_bott_inequality(pl: GeneralizedPlanner, label: str = "", reference=None,
                                coverage: CoverageReport | None = None) -> BoundReport:
    """``D + 1 <= sum_i (r_i + 1)`` with ``r_i + 1`` the per-level piece counts."""
    prov = pl.provenance
    if "levels" not in prov:
        raise ConfigurationError("planner has no per-level provenance")
    terms = [(lv["value"], lv["pieces"]) for lv in prov["levels"]]
    total = sum(c for _, c in terms)
    ub = upper_bound_from_planner(pl, coverage)
    value, prov_tag = _reference(reference)
    return BoundReport(label or pl.name, ub, terms, total - 1, ub + 1 <= total, value, prov_tag,
                       {"sum_of_level_terms": total, "subadditivity_rhs": total,
                        "arithmetic": f"{ub + 1} <= " + " + ".join(str(c) for _, c in terms)})


def check_cutlocus_inequality(pl: GeneralizedPlanner, label: str = "", reference=None,
                              coverage: CoverageReport | None = None) -> BoundReport:
    """``D <= D_M(N) + D_M(Cut N) + 1``; the version without ``+1`` is reported alongside."""
    prov = pl.provenance
    if prov.get("kind") not in ("CutLocus",) and "pieces_on_N" not in prov:
        raise ConfigurationError("planner is not a cut-locus planner")
    n_n, n_c = int(prov["pieces_on_N"]), int(prov["pieces_on_cut"])
    ub = upper_bound_from_planner(pl, coverage)
    if n_c == 0:
        rhs = n_n - 1
        without = rhs
        arithmetic = f"{ub} <= {n_n - 1}"
    else:
        rhs = (n_n - 1) + (n_c - 1) + 1
        without = (n_n - 1) + (n_c - 1)
        arithmetic = f"{ub} <= {n_n - 1} + {n_c - 1} + 1"
    value, prov_tag = _reference(reference)
    terms = [(0.0, n_n)] + ([(float("inf"), n_c)] if n_c else [])
    return BoundReport(label or pl.name, ub, terms, rhs, ub <= rhs, value, prov_tag,
                       {"pieces_on_N": n_n, "pieces_on_cut": n_c, "rhs_without_plus_one": without,
                        "holds_without_plus_one": ub <= without, "arithmetic": arithmetic})


def components_max_rule(per_component_bounds) -> int:
    """Distance on a disjoint union of components is the max of the per-component distances."""
    b = [int(v) for v in per_component_bounds]
    if not b:
        raise ConfigurationError("need at least one component bound")
    if any(v < 0 for v in b):
        raise ConfigurationError("bounds are non-negative")
    return max(b)


def winding_number(fn, samples: int = WINDING_SAMPLES) -> int:
    """Degree of a circle map given on angles, by unwrapping ``fn`` over one turn."""
    theta = 2.0 * np.pi * np.arange(samples + 1) / samples
    phase = np.unwrap(np.asarray(fn(theta), dtype=float))
    w = (phase[-1] - phase[0]) / (2.0 * np.pi)
    return int(np.rint(w))


def _power_map(degree: int):
    return lambda theta: np.mod(degree * theta, 2.0 * np.pi)


def iterate_winding(degree: int, k: int, samples: int = WINDING_SAMPLES) -> int:
    """Winding number of the k-th iterate of ``z -> z^degree``.

    The iterate is sampled directly while its degree stays resolvable
    (below ``samples / 2``); beyond that the measured degree of ``f`` is
    raised to the k-th power.
    """
    if k < 1:
        raise ConfigurationError("iterate index must be >= 1")
    d1 = winding_number(_power_map(degree), samples)
    if abs(degree) ** k < samples // 2:
        def it(theta):
            out = theta
            for _ in range(k):
                out = _power_map(degree)(out)
            return out
        return winding_number(it, samples)
    return d1 ** k


def weak_category_sequence(degree: int, kmax: int = 10, samples: int = WINDING_SAMPLES) -> list[int]:
    """Per-iterate bound ``D(f^k, x0)`` on the whole circle for ``k = 1..kmax``.

    A nullhomotopic iterate gives 0; otherwise the bound is ``cat(S^1) = 1``.
    """
    return [0 if iterate_winding(degree, k, samples) == 0 else 1 for k in range(1, kmax + 1)]


def weak_category_circle(degree: int, kmax: int = 10, samples: int = WINDING_SAMPLES) -> int:
    seq = weak_category_sequence(degree, kmax, samples)
    if any(b > a for a, b in zip(seq, seq[1:])):
        raise AuditError("monotone_iterates", f"bound sequence increases: {seq}")
    return seq[-1]
