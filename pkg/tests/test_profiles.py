import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hyperheat.datum import Atom, InitialDatum
from hyperheat.geometry import PolarPoint, m_d, sphere_area
from hyperheat.profiles import (TransientEquilibrium, directional_mass, gaussian, horo_equilibrium_V, log_phi,
                                memory_Phi, phi, phi_ratio_limit_check, radial_C_bounds, radial_C_excess,
                                radial_C_inf, radial_C_log_rate, radial_equilibrium_C, radial_equilibrium_V)
from hyperheat.solvers import SuperpositionEvaluator
from hyperheat.sphere import sphere_grid, zonal_nodes


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_gaussian_values():
    assert gaussian(1.0, 0.0) == 1.0
    assert gaussian(4.0, 0.0) == 0.5
    assert gaussian(1.0, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    with pytest.raises(ValueError):
        gaussian(0.0, 1.0)


def test_C_against_oracle(oracles):
    for d, T, v in oracles["C"]:
        assert radial_equilibrium_C(d, 1.0, T) == pytest.approx(float(v), rel=1e-10)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("t", [1.0, 2.0, 5.0, 20.0])
def test_C_bounds(d, t):
    lo, hi = radial_C_bounds(d, 1.0, t + 1.0)
    C = radial_equilibrium_C(d, 1.0, t + 1.0)
    assert lo <= C <= hi


def test_C_limit_and_linearity():
    assert radial_equilibrium_C(2, 1.0, 200.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert radial_C_inf(3, 1.0) == pytest.approx(2 / math.sqrt(math.pi))
    assert radial_equilibrium_C(3, 2.0, 4.0) == pytest.approx(2 * radial_equilibrium_C(3, 1.0, 4.0), rel=1e-14)
    assert radial_C_excess(3, 1.0, 4.0) == pytest.approx(
        radial_equilibrium_C(3, 1.0, 4.0) - radial_C_inf(3, 1.0), rel=1e-8)


@pytest.mark.parametrize("d", [2, 3])
def test_C_excess_rate(d):
    T = np.linspace(3.0, 31.0, 30)
    ex = np.array([radial_C_excess(d, 1.0, x) for x in T])
    slope = np.polyfit(T, np.log(ex), 1)[0]
    assert slope <= -m_d(d) + 0.05


@pytest.mark.parametrize("d", [2, 3])
def test_log_rate_of_C_within_envelope(d):
    T = np.linspace(3.0, 31.0, 15)
    q = np.array([abs(radial_C_log_rate(d, x)) * math.exp(m_d(d) * x) for x in T])
    assert np.all(np.isfinite(q))
    # a single k works for the whole range: the late ratios never exceed the early ones
    assert q[T >= 15].max() <= q[T < 15].max()
    assert np.all(np.array([radial_C_log_rate(d, x) for x in T]) < 0)


def test_radial_V_values_and_mass(oracles):
    C2 = float([v for d, T, v in oracles["C"] if d == 2 and T == 2][0])
    assert radial_equilibrium_V(2, 1.0, 1.0, 3.0) == pytest.approx(C2 * math.sinh(3.0) * math.exp(-25 / 8), rel=1e-10)
    assert radial_equilibrium_V(3, 1.0, 2.0, 0.0) == 0.0
    for d, t in [(2, 1.0), (3, 4.0)]:
        val, _ = integrate.quad(lambda r: radial_equilibrium_V(d, 1.0, t, r), 0, np.inf, epsrel=1e-12, limit=200)
        assert val / math.sqrt(t + 1) == pytest.approx(1.0, abs=1e-8)


def test_horo_V():
    assert horo_equilibrium_V(2, 1.0, 0.0, 1.0) == 1.0
    assert horo_equilibrium_V(3, 2.5, 3.0, 8.0) == 2.5
    assert horo_equilibrium_V(3, 1.0, 2.0, 6 + 1.3) == pytest.approx(horo_equilibrium_V(3, 1.0, 2.0, 6 - 1.3))
    eq = TransientEquilibrium(3, "horospheric", 2.0)
    assert eq.C(5.0) == 2.0
    with pytest.raises(ValueError):
        TransientEquilibrium(3, "radial", 0.0)


def test_phi_basic():
    th = unit([1, 0, 0])
    assert phi(3, PolarPoint(0.0, th), unit([0.3, 1, 0])) == pytest.approx(1.0)
    assert phi(3, PolarPoint(1.5, th), th) == pytest.approx(math.exp(2 * 1.5), rel=1e-12)


@given(st.sampled_from([2, 3]), st.floats(0.0, 30.0), st.floats(-1.0, 1.0))
def test_phi_positive_and_bounded(d, ry, c):
    lp = float(log_phi(d, ry, c))
    assert np.isfinite(lp)
    assert lp <= (d - 1) * ry + 1e-9


@pytest.mark.parametrize("ry", [0.5, 1.0, 2.0])
def test_spherical_mean_of_phi_d2_closed_form(ry):
    # int_0^{2pi} d th / (a - b cos th) = 2 pi / sqrt(a^2 - b^2) with a = cosh, b = sinh
    a, b = math.cosh(ry), math.sinh(ry)
    assert 2 * math.pi / math.sqrt(a * a - b * b) / (2 * math.pi) == pytest.approx(1.0, abs=1e-14)
    g = sphere_grid(2, 256)
    vals = np.exp(log_phi(2, ry, g.nodes[:, 0]))
    assert g.with_values(vals).mean() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("ry", [0.5, 1.0, 2.0])
def test_spherical_mean_of_phi_d3_quadrature(ry):
    val, _ = integrate.quad(lambda c: math.exp(float(log_phi(3, ry, c))), -1, 1, epsrel=1e-13)
    assert val / 2 == pytest.approx(1.0, abs=1e-10)
    c, omc, w = zonal_nodes(3)
    assert np.exp(log_phi(3, ry, c, omc)) @ w / w.sum() == pytest.approx(1.0, abs=1e-6)
    g = sphere_grid(3, 128)
    vals = np.exp(log_phi(3, ry, g.nodes[:, 0]))
    assert g.with_values(vals).mean() == pytest.approx(1.0, abs=1e-6)


def test_phi_ratio_oracle(oracles):
    for d, ry, c, v in oracles["phi_ratio_t40"]:
        th = np.zeros(d)
        th[0], th[1] = c, math.sqrt(1 - c * c)
        q = phi_ratio_limit_check(d, PolarPoint(ry, np.eye(d)[0]), th, 0.0, [40.0])[0]
        assert q == pytest.approx(float(v), rel=1e-9)


def test_phi_ratio_examples():
    e = np.eye(3)[0]
    q3 = phi_ratio_limit_check(3, PolarPoint(1.0, e), e, 0.0, [40.0])[0]
    assert abs(q3 / math.e ** 2 - 1) < 0.02
    q2 = phi_ratio_limit_check(2, PolarPoint(1.0, np.eye(2)[0]), np.eye(2)[1], 0.0, [40.0])[0]
    assert abs(q2 * math.cosh(1.0) - 1) < 0.05
    ones = phi_ratio_limit_check(2, PolarPoint(0.0, np.eye(2)[0]), np.eye(2)[1], 0.5, [1.0, 5.0, 30.0])
    assert np.allclose(ones, 1.0, rtol=1e-12)


def test_phi_ratio_validation():
    y = PolarPoint(1.0, np.eye(2)[0])
    with pytest.raises(ValueError):
        phi_ratio_limit_check(2, y, np.eye(2)[0], 0.0, [5.0, 1.0])
    with pytest.raises(ValueError):
        phi_ratio_limit_check(2, y, np.eye(2)[0], 3.0, [4.0, 9.0])


@pytest.mark.parametrize("d", [2, 3])
def test_memory_Phi_radial_is_mass(d):
    g = sphere_grid(d, 32 if d == 2 else 12)
    u0 = InitialDatum.radial_bump(d, 2.5, 1.0)
    vals = memory_Phi(d, u0, g).values
    assert np.allclose(vals, 2.5, rtol=1e-5)
    assert np.all(memory_Phi(d, InitialDatum.zero(d), g).values == 0.0)


def test_memory_Phi_narrow_bump_ratio():
    e = np.eye(2)[0]
    u0 = InitialDatum.atom_mixture([Atom(PolarPoint(1.0, e), 1.0, 1e-2)])
    g = sphere_grid(2, 64)
    vals = memory_Phi(2, u0, g).values
    i_plus = int(np.argmax(g.nodes @ e))
    i_minus = int(np.argmin(g.nodes @ e))
    assert vals[i_plus] / vals[i_minus] == pytest.approx(math.e ** 2, rel=1e-3)


def test_directional_mass_radial_and_kernel():
    d = 2
    u0 = InitialDatum.radial_bump(d, 1.0, 0.5)
    g = sphere_grid(d, 16)
    ev = SuperpositionEvaluator(d, u0, 3.0)
    N = directional_mass(d, ev, 3.0, g)
    assert np.allclose(N.values, 1.0 / sphere_area(d), rtol=1e-6)
    assert N.integral() == pytest.approx(1.0, abs=1e-6)


TWO_ATOMS = InitialDatum.atom_mixture([Atom(PolarPoint(1.0, np.array([1.0, 0.0])), 1.0, 0.5),
                                       Atom(PolarPoint(0.5, np.array([0.0, 1.0])), 0.5, 0.5)])


def test_directional_mass_conserved_in_time():
    g = sphere_grid(2, 48)
    totals = [directional_mass(2, SuperpositionEvaluator(2, TWO_ATOMS, t), t, g).integral() for t in (1.0, 10.0, 30.0)]
    assert np.allclose(totals, 1.5, rtol=1e-4)


def test_directional_mass_settles_superpolynomially():
    # increments |N(t_k+1) - N(t_k)| on log-log axes fall faster than 1/t
    g = sphere_grid(2, 48)
    ts = [6.0, 9.0, 13.0, 18.0, 24.0]
    Ns = [directional_mass(2, SuperpositionEvaluator(2, TWO_ATOMS, t), t, g).values for t in ts]
    inc = [float(np.max(np.abs(b - a))) for a, b in zip(Ns, Ns[1:])]
    slope = np.polyfit(np.log(ts[:-1]), np.log(inc), 1)[0]
    assert slope < -1.0
