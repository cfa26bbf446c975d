import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homdist.distance import (
    REFERENCES, BoundReport, ReferenceEntry, ReferenceTable, check_cutlocus_inequality,
    check_morse_bott_inequality, components_max_rule, iterate_winding, upper_bound_from_planner,
    weak_category_circle, weak_category_sequence, winding_number,
)
from homdist.errors import AuditError, ConfigurationError
from homdist.planner import CoverageReport, coverage_audit
from homdist.scenarios.config import load_config
from homdist.scenarios.runner import build_planner, tc_torus_planner


@pytest.fixture(scope="module")
def t2():
    return tc_torus_planner(2)


@pytest.fixture(scope="module")
def s2():
    return build_planner(load_config("tc_sphere2_cutlocus"))[0]


def test_morse_bott_report_torus(t2):
    rep = check_morse_bott_inequality(t2, reference=("TC", "T2"))
    assert rep.upper_bound == 2 and rep.inequality_holds
    assert [c for _, c in rep.per_level_terms] == [1, 1, 1]
    assert rep.extras["arithmetic"] == "3 <= 1 + 1 + 1"
    assert rep.matches_reference and rep.reference_provenance == "derived"


def test_morse_bott_report_circle():
    rep = check_morse_bott_inequality(tc_torus_planner(1), reference=("TC", "S1"))
    assert rep.upper_bound == 1 and rep.theorem_form_rhs == 1 and rep.matches_reference


def test_cutlocus_report_sphere(s2):
    rep = check_cutlocus_inequality(s2, reference=("TC", "S2"))
    assert rep.upper_bound == 2 and rep.theorem_form_rhs == 2
    assert rep.extras["arithmetic"] == "2 <= 0 + 1 + 1"
    assert rep.extras["rhs_without_plus_one"] == 1 and not rep.extras["holds_without_plus_one"]
    assert rep.reference_value == 2 and rep.reference_provenance == "published"


def test_checkers_reject_wrong_planner_kind(t2, s2):
    with pytest.raises(ConfigurationError):
        check_cutlocus_inequality(t2)
    with pytest.raises(ConfigurationError):
        check_morse_bott_inequality(s2)


def test_failed_coverage_blocks_bound(t2):
    bad = CoverageReport(samples=10, unclaimed=1, per_piece=[9, 0, 0], examples=[])
    with pytest.raises(AuditError):
        upper_bound_from_planner(t2, bad)
    assert upper_bound_from_planner(t2, coverage_audit(t2, 1000)) == 2


def test_reference_table():
    assert REFERENCES.lookup("TC", "S2").value == 2
    assert REFERENCES.lookup("TC", "CP9") is None
    with pytest.raises(ConfigurationError):
        ReferenceTable({("x", "y"): ReferenceEntry(1, "")})
    with pytest.raises(ConfigurationError):
        check_morse_bott_inequality(tc_torus_planner(1), reference=("TC", "nowhere"))


def test_bound_report_dict_and_validation():
    rep = BoundReport("x", 1, [(0.0, 2)], 1, True)
    assert rep.matches_reference is None and rep.to_dict()["upper_bound"] == 1
    with pytest.raises(ConfigurationError):
        BoundReport("x", -1, [], 0, True)


def test_components_max_rule():
    assert components_max_rule([0, 2, 1]) == 2
    with pytest.raises(ConfigurationError):
        components_max_rule([])
    with pytest.raises(ConfigurationError):
        components_max_rule([1, -1])


def test_winding_examples():
    assert winding_number(lambda t: 3 * t) == 3
    assert winding_number(lambda t: -t + 0.4 * np.sin(t)) == -1
    assert winding_number(lambda t: 0.5 * np.sin(t)) == 0
    assert iterate_winding(2, 3) == 8
    assert iterate_winding(5, 10) == 5 ** 10
    with pytest.raises(ConfigurationError):
        iterate_winding(2, 0)


@pytest.mark.parametrize("degree, expected", [(0, 0), (1, 1), (2, 1), (-1, 1), (5, 1)])
def test_weak_category_circle(degree, expected):
    assert weak_category_circle(degree, 10) == expected
    seq = weak_category_sequence(degree, 10)
    assert all(b <= a for a, b in zip(seq, seq[1:]))


@settings(max_examples=30, deadline=None)
@given(degree=st.integers(-6, 6), k=st.integers(1, 3))
def test_iterate_winding_is_power(degree, k):
    assert iterate_winding(degree, k) == degree ** k


@settings(max_examples=30, deadline=None)
@given(bounds=st.lists(st.integers(0, 20), min_size=1, max_size=8))
def test_max_rule_dominates(bounds):
    m = components_max_rule(bounds)
    assert m in bounds and all(b <= m for b in bounds)
