import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperheat.geometry import (HoroPoint, PolarPoint, angle, check_dimension, distance_from_cos,
                                horo_measure_weight, hyperbolic_distance, lambda1, m_d, radial_measure_weight,
                                sphere_area)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


radii = st.floats(0.0, 40.0, allow_nan=False)
directions = st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3).map(unit)
points = st.builds(PolarPoint, radii, directions)


def test_distance_identity():
    x = PolarPoint(1.3, unit([1, 2, 3]))
    assert hyperbolic_distance(x, x) == 0.0


def test_distance_collinear():
    e = np.array([0.0, 1.0])
    assert hyperbolic_distance(PolarPoint(2.0, e), PolarPoint(0.5, e)) == pytest.approx(1.5, abs=1e-14)


def test_distance_antipodal():
    e = np.array([1.0, 0.0])
    assert hyperbolic_distance(PolarPoint(1.0, e), PolarPoint(1.0, -e)) == pytest.approx(2.0, abs=1e-14)


def test_distance_matches_hyperboloid_inner_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = PolarPoint(rng.uniform(0, 5), unit(rng.normal(size=3)))
        y = PolarPoint(rng.uniform(0, 5), unit(rng.normal(size=3)))
        X, Y = x.hyperboloid(), y.hyperboloid()
        ref = math.acosh(max(1.0, X[0] * Y[0] - X[1:] @ Y[1:]))
        assert hyperbolic_distance(x, y) == pytest.approx(ref, rel=1e-9, abs=1e-7)


def test_distance_near_coincident_keeps_precision():
    # two points 1e-9 apart along the sphere at radius 1
    eps = 1e-9
    x = PolarPoint(1.0, np.array([1.0, 0.0]))
    y = PolarPoint(1.0, np.array([math.cos(eps), math.sin(eps)]))
    lam = float(distance_from_cos(1.0, 1.0, None, one_minus_cos=2 * math.sin(eps / 2) ** 2))
    assert lam == pytest.approx(math.sinh(1.0) * eps, rel=1e-6)
    assert hyperbolic_distance(x, y) >= 0.0


def test_distance_large_radii_no_overflow():
    lam = float(distance_from_cos(400.0, 350.0, -1.0))
    assert lam == pytest.approx(750.0, rel=1e-12)


@given(points, points)
def test_distance_symmetric(x, y):
    assert hyperbolic_distance(x, y) == hyperbolic_distance(y, x)


@given(points, points)
def test_distance_at_least_radial_gap(x, y):
    assert hyperbolic_distance(x, y) >= abs(x.r - y.r) - 1e-9


@given(st.floats(0.05, 30), st.floats(0.05, 30), st.floats(0.0, math.pi))
def test_angular_lower_bounds(rx, ry, th):
    # 1 - cos th = 2 sin^2(th/2), so the acute-angle bound carries the half angle
    lam = float(distance_from_cos(rx, ry, math.cos(th)))
    if math.cos(th) >= 0 and math.sin(th / 2) > 0:
        assert lam >= rx + ry + math.log(0.5) + 2 * math.log(math.sin(th / 2)) - 1e-9
    if math.cos(th) <= 0:
        assert lam >= rx + ry - math.log(4.0) - 1e-9


def test_acute_bound_with_full_angle_is_false():
    # the full-angle variant ln(sin^2(th)/2) overshoots: a concrete counterexample
    rx, ry, th = 1.0, 2.0, 1.0
    lam = float(distance_from_cos(rx, ry, math.cos(th)))
    assert lam < rx + ry + math.log(0.5 * math.sin(th) ** 2)


def test_triangle_inequality_random_triples():
    rng = np.random.default_rng(0)
    n = 10_000
    r = rng.uniform(0, 10, size=(3, n))
    th = rng.normal(size=(3, n, 3))
    th /= np.linalg.norm(th, axis=-1, keepdims=True)

    def dist(i, j):
        return distance_from_cos(r[i], r[j], np.einsum("nk,nk->n", th[i], th[j]))

    assert np.all(dist(0, 2) <= dist(0, 1) + dist(1, 2) + 1e-10)


def test_angle_cases():
    e1, e2 = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    assert angle(e1, e1) == 0.0
    assert angle(e1, e2) == pytest.approx(math.pi / 2)
    assert angle(e1, -e1) == pytest.approx(math.pi)


def test_measure_weights():
    assert radial_measure_weight(3, 0.0) == 0.0
    assert radial_measure_weight(2, 1.0) == pytest.approx(math.sinh(1.0), rel=1e-15)
    assert radial_measure_weight(3, 1.0) == pytest.approx(math.sinh(1.0) ** 2, rel=1e-15)
    assert horo_measure_weight(2, 0.0) == 1.0
    assert horo_measure_weight(3, math.log(2.0)) == pytest.approx(4.0, rel=1e-15)
    assert horo_measure_weight(4, -1.0) == pytest.approx(math.exp(-3.0), rel=1e-15)


def test_radial_weight_log_branch_is_continuous():
    lo, hi = radial_measure_weight(3, 30.0 - 1e-12), radial_measure_weight(3, 30.0 + 1e-12)
    assert hi / lo == pytest.approx(1.0, abs=1e-10)
    assert np.isfinite(radial_measure_weight(2, 700.0))


def test_radial_weight_rejects_negative():
    with pytest.raises(ValueError):
        radial_measure_weight(2, -0.1)


def test_point_validation():
    with pytest.raises(ValueError):
        PolarPoint(-1.0, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        PolarPoint(1.0, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        HoroPoint(float("nan"), [0.0])
    with pytest.raises(ValueError):
        check_dimension(1)


def test_constants():
    assert lambda1(3) == 1.0
    assert m_d(2) == pytest.approx(1 / 16)
    assert m_d(3) == pytest.approx(0.25)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
