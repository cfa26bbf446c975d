import json

import numpy as np
import pytest

from homdist.errors import AuditError, ConfigurationError
from homdist.manifold import read_path_csv
from homdist.planner import plan
from homdist.scenarios.apps import build_fibration_planner, build_workmap_planner
from homdist.scenarios.cli import main
from homdist.scenarios.config import (
    Expr, build_manifold, bundled_names, load_config, parse_config_text, parse_expr, parse_list,
)
from homdist.scenarios.runner import build_planner, report_json, run_scenario, tc_torus_planner

PI = np.pi

SMALL_CIRCLE = """
# small TC planner of the circle
name = small_circle
recipe = MorseBott
manifold = Product(Circle, Circle)
f = ProjectionFirst
g = ProjectionSecond
navigation = TorusCosine(1)
level_pieces = Translation, Translation
reference = TC(S1)
samples = 400
continuity_samples = 100
flow_samples = 100
"""


def small_circle():
    return parse_config_text(SMALL_CIRCLE, "small")


# -- config grammar -------------------------------------------------------------------

def test_bundled_names():
    assert bundled_names() == sorted([
        "cat_sphere", "tc_circle", "tc_torus2", "tc_sphere2_cutlocus", "cutlocus_torus_detect",
        "workmap_arm", "fibration_t2_s1", "weakcat_circle"])
    for name in bundled_names():
        assert load_config(name).name == name


def test_expression_parser():
    assert parse_expr("pi/2") == pytest.approx(PI / 2)
    assert parse_expr("-1.5") == -1.5
    e = parse_expr("Product(Torus(2), Sphere(2))")
    assert isinstance(e, Expr) and e.name == "Product" and e.args[0] == Expr("Torus", (2,))
    assert parse_expr("(0, 0, 1)") == (0, 0, 1)
    assert parse_list("0, 1, -1") == [0, 1, -1]
    with pytest.raises(ConfigurationError):
        parse_expr("__import__('os')")
    with pytest.raises(ConfigurationError):
        parse_expr("Torus(2")


def test_manifold_catalog():
    assert build_manifold(parse_expr("Product(Sphere(2), Circle)")).dimension == 3
    for bad in ("Klein(2)", "Sphere(0)", "Torus(-1)", "Sphere", "Product(Circle)"):
        with pytest.raises(ConfigurationError):
            build_manifold(parse_expr(bad))


@pytest.mark.parametrize("text", [
    "name = x\n",
    "name = x\nrecipe = Nope\n",
    "name = x\nrecipe = MorseBott\ncolour = red\n",
    "name = x\nname = y\nrecipe = MorseBott\n",
    "name = x\nrecipe = MorseBott\nseed =\n",
    "name = x\nrecipe = MorseBott\njust text\n",
    "name = x\nrecipe = MorseBott\nmanifold = Klein(2)\n",
    "name = x\nrecipe = MorseBott\nmanifold = Circle\nf = Identity\n",
    "name = x\nrecipe = MorseBott\nf = Identity\ng = Identity\n",
    "name = x\nrecipe = MorseBott\nseed = -3\n",
    "name = x\nrecipe = MorseBott\nmanifold = Sphere(2)\nf = Identity\ng = ProjectionFirst\n",
])
def test_malformed_configs(text):
    with pytest.raises(ConfigurationError):
        parse_config_text(text)


def test_overrides():
    cfg = small_circle().with_overrides(seed=7, samples=50, out="somewhere")
    assert (cfg.seed, cfg.samples, cfg.out) == (7, 50, "somewhere")
    with pytest.raises(ConfigurationError):
        small_circle().with_overrides(samples=0)
    with pytest.raises(ConfigurationError):
        load_config("no_such_scenario")


# -- runner -------------------------------------------------------------------------

def test_small_circle_report():
    rep = run_scenario(small_circle())
    assert rep.passed
    assert rep.data["bounds"][0]["upper_bound"] == 1
    assert rep.data["bounds"][0]["matches_reference"]
    assert set(rep.data["audits"]) >= {"coverage", "endpoint_contract", "continuity", "flows", "critical_levels"}


def test_report_is_byte_identical(tmp_path):
    a = run_scenario(small_circle(), out=str(tmp_path / "a"))
    b = run_scenario(small_circle(), out=str(tmp_path / "b"))
    assert report_json(a) == report_json(b)
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    for name in a.files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_report():
    a = run_scenario(small_circle())
    b = run_scenario(small_circle().with_overrides(seed=3))
    assert report_json(a) != report_json(b)


def test_report_keys_sorted(tmp_path):
    run_scenario(small_circle(), out=str(tmp_path))
    text = (tmp_path / "report.json").read_text()
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["files"] == ["report.json", "path_piece0.csv", "path_piece1.csv"]


def test_torus_export_manifest(tmp_path):
    cfg = load_config("tc_torus2").with_overrides(samples=300)
    rep = run_scenario(cfg, out=str(tmp_path))
    assert rep.files == ["report.json"] + [f"path_piece{j}.csv" for j in range(3)]
    assert rep.data["bounds"][0]["upper_bound"] == 2
    for j in range(3):
        p = read_path_csv(rep.planner.target, tmp_path / f"path_piece{j}.csv")
        x = np.array(rep.data["exemplars"][j]["x"])
        assert np.allclose(p.start, x[:2]) and float(rep.planner.target.dist(p.end, x[2:])) < 1e-6


def test_weakcat_report_only(tmp_path):
    rep = run_scenario(load_config("weakcat_circle"), out=str(tmp_path))
    assert rep.files == ["report.json"]
    assert [r["value"] for r in rep.data["weak_category"]] == [0, 1, 1, 1, 1]


def test_wrong_expectation_names_invariant():
    cfg = parse_config_text("name = w\nrecipe = WeakCategory\ndegrees = 2\nexpected = 0\n")
    with pytest.raises(AuditError) as exc:
        run_scenario(cfg)
    assert exc.value.invariant == "expected_values"
    assert not run_scenario(cfg, strict=False).passed


def test_level_piece_count_mismatch():
    text = SMALL_CIRCLE.replace("level_pieces = Translation, Translation", "level_pieces = Translation, Translation, Geodesic")
    with pytest.raises(ConfigurationError):
        run_scenario(parse_config_text(text))


# -- applications ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def workmap():
    return build_workmap_planner((1.0, 1.0), tc_torus_planner(2))


def test_workmap_examples(workmap):
    assert workmap.piece_count == 3
    path, _ = plan(workmap, np.array([0.0, 0.0, PI, 0.0]))
    assert np.allclose(path.start, [2, 0]) and np.allclose(path.end, [-2, 0], atol=1e-9)
    path, _ = plan(workmap, np.array([0.0, 0.0, 0.0, PI]))
    assert np.allclose(path.end, [0, 0], atol=1e-9)
    x = np.array([0.4, 1.1, 0.4, 1.1])
    path, _ = plan(workmap, x)
    assert np.allclose(path.coords, path.coords[0]) and np.allclose(path.start, workmap.f.apply(x))


def test_workmap_lift_maps_to_section(workmap):
    rng = np.random.default_rng(0)
    for x in workmap.source.sample(rng, 20):
        path, j = plan(workmap, x)
        q = workmap.pieces[j].lift(x)
        assert np.allclose(workmap.f.outer.apply(q.coords), path.coords, atol=1e-12)


def test_workmap_rejects_non_torus():
    with pytest.raises(ConfigurationError):
        build_workmap_planner((1, 1), tc_torus_planner(1))


@pytest.fixture(scope="module")
def fibration():
    return build_fibration_planner(tc_torus_planner(1))


def test_fibration_examples(fibration):
    assert fibration.piece_count == 2
    z = np.array([0.0, 1.0, PI])
    path, j = plan(fibration, z)
    assert path.end[0] == pytest.approx(PI)
    lift = fibration.pieces[j].lift(z)
    assert np.allclose(lift.end, [PI, 1.0]) and np.allclose(lift.start, [0.0, 1.0])
    z = np.array([2.0, 1.0, 2.0])
    path, _ = plan(fibration, z)
    assert np.allclose(path.coords, 2.0)


def test_fibration_lift_projects_to_base(fibration):
    for z in fibration.source.sample(np.random.default_rng(1), 50):
        path, j = plan(fibration, z)
        lift = fibration.pieces[j].lift(z)
        assert np.max(np.abs(lift.coords[:, 0] - path.coords[:, 0])) <= 1e-9
        assert np.all(lift.coords[:, 1] == z[1])


def test_fibration_validation():
    with pytest.raises(ConfigurationError):
        build_fibration_planner(tc_torus_planner(2))


def test_single_antipodal_attempt_is_rejected_in_scenario():
    cfg = load_config("tc_sphere2_cutlocus").with_overrides(samples=200)
    pl, extras = build_planner(cfg)
    assert pl.piece_count == 3 and extras["attempt"].piece_count == 2


# -- CLI ------------------------------------------------------------------------------

def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_cli_list(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 8 and out[0].startswith("cat_sphere\tCutLocus")


def test_cli_run_and_audit(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_CIRCLE)
    assert main(["run", cfg, "--out", str(tmp_path / "o"), "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "D <= 1" in out
    assert json.loads((tmp_path / "o" / "report.json").read_text())["config"]["seed"] == "1"
    assert main(["audit", cfg, "--samples", "200"]) == 0


def test_cli_export_paths(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_CIRCLE)
    assert main(["export-paths", cfg, "--out", str(tmp_path / "p")]) == 0
    assert sorted(p.name for p in (tmp_path / "p").iterdir()) == ["path_piece0.csv", "path_piece1.csv"]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["audit", write(tmp_path, "name = x\nrecipe = MorseBott\nmanifold = Klein(2)\n")]) == 3
    assert main(["audit", str(tmp_path / "missing.cfg")]) == 3
    bad = write(tmp_path, "name = w\nrecipe = WeakCategory\ndegrees = 2\nexpected = 0\n", "w.cfg")
    assert main(["audit", bad]) == 2
    assert "FAIL" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["frobnicate"])

