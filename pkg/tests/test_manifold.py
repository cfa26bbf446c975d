import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homdist.errors import ConfigurationError, ContractError
from homdist.manifold import (
    Circle, Path, Point, Product, RealProjective, Sphere, TangentVector, Torus,
    concatenate_many, concatenate_paths, exp_map, minimizing_geodesics, read_path_csv,
    reverse_path, riemannian_distance, sup_distance, wrap_angle, wrap_diff, write_path_csv,
)

PI = np.pi
CATALOG = [Circle(), Torus(2), Torus(3), Sphere(1), Sphere(2), Sphere(3), RealProjective(2),
           RealProjective(3), Product(Sphere(2), Circle()), Product(Torus(2), Sphere(2))]


def brute_torus_distance(a, b, k=3):
    # oracle: minimize over lattice translates b + 2 pi j, j in [-k, k]^n
    a, b = np.asarray(a, float), np.asarray(b, float)
    best = np.inf
    for j in itertools.product(range(-k, k + 1), repeat=len(a)):
        best = min(best, np.linalg.norm(b + 2 * PI * np.array(j) - a))
    return best


def brute_sphere_distance(x, y):
    return float(np.arccos(np.clip(np.dot(x, y), -1, 1)))


# -- exp / distance / minimizers examples ------------------------------------

def test_exp_quarter_great_circle():
    S2 = Sphere(2)
    x = Point(S2, [0, 0, 1])
    y = exp_map(x, TangentVector(x, [1, 0, 0]), PI / 2)
    assert np.allclose(y.coords, [1, 0, 0], atol=1e-12)


def test_exp_torus_wraps():
    T2 = Torus(2)
    x = Point(T2, [0, 0])
    y = exp_map(x, TangentVector(x, [1, 0]), 3 * PI)
    assert np.allclose(y.coords, [PI, 0], atol=1e-12)


def test_exp_projective_antipodal_identification():
    RP2 = RealProjective(2)
    x = Point(RP2, [0, 0, 1])
    y = exp_map(x, TangentVector(x, [1, 0, 0]), PI)
    assert np.allclose(y.coords, [0, 0, 1], atol=1e-12)


def test_exp_rejects_negative_time_and_foreign_base():
    x = Point(Sphere(2), [0, 0, 1])
    v = TangentVector(x, [1, 0, 0])
    with pytest.raises(ConfigurationError):
        exp_map(x, v, -1.0)
    with pytest.raises(ConfigurationError):
        exp_map(Point(Sphere(2), [1, 0, 0]), v, 1.0)


def test_distance_examples():
    assert riemannian_distance(Point(Sphere(2), [0, 0, 1]), Point(Sphere(2), [0, 0, -1])) == pytest.approx(PI)
    assert riemannian_distance(Point(Torus(2), [0, 0]), Point(Torus(2), [PI, PI])) == pytest.approx(PI * np.sqrt(2))
    d = riemannian_distance(Point(Torus(1), [0]), Point(Torus(1), [0.5]))
    assert d == pytest.approx(brute_torus_distance([0], [0.5])) == pytest.approx(0.5)


def test_distance_between_manifolds_rejected():
    with pytest.raises(ConfigurationError):
        riemannian_distance(Point(Torus(2), [0, 0]), Point(Sphere(1), [1, 0]))


def test_minimizers_torus_corner_has_four():
    m = minimizing_geodesics(Point(Torus(2), [0, 0]), Point(Torus(2), [PI, PI]))
    assert len(m) == 4 and not m.continuum
    for s in m:
        assert s.length == pytest.approx(PI * np.sqrt(2))


def test_minimizers_sphere_unique_and_antipodal_continuum():
    x = Point(Sphere(2), [0, 0, 1])
    assert len(minimizing_geodesics(x, Point(Sphere(2), [1, 0, 0]))) == 1
    m = minimizing_geodesics(x, Point(Sphere(2), [0, 0, -1]))
    assert m.continuum and len(m) == 8


def test_minimizers_circle_half_turn():
    m = minimizing_geodesics(Point(Circle(), [0]), Point(Circle(), [PI]))
    assert len(m) == 2
    dirs = sorted(float(s.initial_velocity.components[0]) for s in m)
    assert dirs == [-1.0, 1.0]


def test_point_validation():
    with pytest.raises(ConfigurationError):
        Point(Sphere(2), [1, 1, 0])
    with pytest.raises(ConfigurationError):
        Point(RealProjective(2), [0, 0, -1])
    p = Point.from_raw(RealProjective(2), [0, 0, -2])
    assert np.allclose(p.coords, [0, 0, 1])
    with pytest.raises(ConfigurationError):
        TangentVector(Point(Sphere(2), [0, 0, 1]), [0, 0, 1])


def test_manifold_kind_and_dimension():
    assert Product(Sphere(2), Torus(3)).dimension == 5
    assert Product(Sphere(2), Torus(3)).coord_dim == 6
    with pytest.raises(ConfigurationError):
        Sphere(0)


# -- paths -------------------------------------------------------------------

def test_concatenate_constants():
    p = [0.3]
    a = Path.constant(Circle(), p)
    c = concatenate_paths(a, a)
    assert np.allclose(c.coords, 0.3) and c.t[0] == 0 and c.t[-1] == 1


def test_concatenate_quarter_circles_is_half_circle():
    a = Path.geodesic(Circle(), [0.0], [PI / 2])
    b = Path.geodesic(Circle(), [PI / 2], [PI - 1e-9])
    c = concatenate_paths(a, b)
    assert c.length() == pytest.approx(PI, abs=1e-6)
    assert np.all(c.t[c.t < 0.5] <= 0.5)


def test_concatenate_with_reverse_returns_home():
    a = Path.geodesic(Sphere(2), [0, 0, 1.0], [1.0, 0, 0])
    c = concatenate_paths(a, reverse_path(a))
    assert np.allclose(c.start, a.start) and np.allclose(c.end, a.start)


def test_concatenate_gap_raises():
    a = Path.constant(Circle(), [0.0])
    b = Path.constant(Circle(), [0.1])
    with pytest.raises(ContractError):
        concatenate_paths(a, b)
    with pytest.raises(ContractError):
        concatenate_many([a, b])


def test_reverse_examples():
    a = Path.geodesic(Circle(), [0.0], [PI - 1e-12])
    r = reverse_path(a)
    assert r.start[0] == pytest.approx(PI) and r.end[0] == pytest.approx(0.0)
    rr = reverse_path(r)
    assert np.array_equal(rr.coords, a.coords) and np.allclose(rr.t, a.t)
    c = Path.constant(Sphere(2), [0, 1.0, 0])
    assert np.array_equal(reverse_path(c).coords, c.coords)


def test_path_validation():
    with pytest.raises(ContractError):
        Path(Circle(), [0.0], [[0.0]])
    with pytest.raises(ContractError):
        Path(Circle(), [0.0, 0.5], [[0.0], [0.1]])
    with pytest.raises(ContractError):
        Path(Sphere(2), [0.0, 1.0], [[0, 0, 1.0], [0, 0, 2.0]])


def test_sup_distance_and_csv_roundtrip(tmp_path):
    a = Path.geodesic(Torus(2), [0.0, 0.0], [1.0, 2.0])
    assert sup_distance(a, a) == 0.0
    f = tmp_path / "p.csv"
    write_path_csv(a, f)
    assert f.read_text().splitlines()[0] == "t,x0,x1"
    b = read_path_csv(Torus(2), f)
    assert np.array_equal(b.coords, a.coords) and np.array_equal(b.t, a.t)


def test_path_at_interpolates_samples():
    a = Path.geodesic(Sphere(2), [0, 0, 1.0], [1.0, 0, 0], samples=5)
    assert np.allclose(a.at(a.t), a.coords, atol=1e-12)
    mid = a.at(0.5)[0]
    assert np.allclose(mid, [np.sqrt(0.5), 0, np.sqrt(0.5)], atol=1e-12)


# -- properties ---------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, which=st.integers(0, len(CATALOG) - 1))
def test_exp_of_minimizer_hits_target(seed, which):
    M = CATALOG[which]
    rng = np.random.default_rng(seed)
    x, y = (Point(M, c) for c in M.sample(rng, 2))
    d = riemannian_distance(x, y)
    for s in minimizing_geodesics(x, y):
        z = exp_map(x, s.initial_velocity, d)
        assert riemannian_distance(z, y) < 1e-6


@settings(max_examples=60, deadline=None)
@given(seed=seeds, which=st.integers(0, len(CATALOG) - 1))
def test_distance_symmetric_and_triangle(seed, which):
    M = CATALOG[which]
    X = M.sample(np.random.default_rng(seed), 3)
    d = lambda a, b: float(M.dist(a, b))
    assert d(X[0], X[1]) == pytest.approx(d(X[1], X[0]), abs=1e-12)
    assert d(X[0], X[2]) <= d(X[0], X[1]) + d(X[1], X[2]) + 1e-9


def test_torus_distance_matches_lattice_oracle():
    rng = np.random.default_rng(11)
    T = Torus(2)
    X, Y = T.sample(rng, 1000), T.sample(rng, 1000)
    ours = T.dist(X, Y)
    oracle = np.array([brute_torus_distance(a, b, k=1) for a, b in zip(X, Y)])
    assert np.max(np.abs(ours - oracle)) < 1e-12


def test_sphere_distance_matches_arccos():
    rng = np.random.default_rng(5)
    S = Sphere(3)
    X, Y = S.sample(rng, 200), S.sample(rng, 200)
    oracle = np.array([brute_sphere_distance(a, b) for a, b in zip(X, Y)])
    assert np.max(np.abs(S.dist(X, Y) - oracle)) < 1e-7


def test_projective_distance_is_min_over_lifts():
    rng = np.random.default_rng(6)
    P = RealProjective(2)
    X, Y = P.sample(rng, 200), P.sample(rng, 200)
    oracle = [min(brute_sphere_distance(a, b), brute_sphere_distance(a, -b)) for a, b in zip(X, Y)]
    assert np.max(np.abs(P.dist(X, Y) - oracle)) < 1e-7


@settings(max_examples=40, deadline=None)
@given(seed=seeds, which=st.integers(0, len(CATALOG) - 1))
def test_path_ops_stay_on_manifold(seed, which):
    M = CATALOG[which]
    X = M.sample(np.random.default_rng(seed), 3)
    a = Path.geodesic(M, X[0], X[1])
    b = Path.geodesic(M, X[1], X[2])
    for p in (concatenate_paths(a, b), reverse_path(a), concatenate_many([a, b, reverse_path(b)])):
        assert np.all(M.residual(p.coords) <= 1e-9)
        assert np.all(np.diff(p.t) > 0)


@given(a=st.floats(-50, 50))
def test_wrap_ranges(a):
    w = wrap_angle(np.array([a]))[0]
    assert 0.0 <= w < 2 * PI
    d = wrap_diff(np.array([a]))[0]
    assert -PI < d <= PI
