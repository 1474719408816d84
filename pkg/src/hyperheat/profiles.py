"""Gaussian and transient-equilibrium profiles, the mass-matching constant C,
the direction-dependent ratio phi, the memory function Phi and the
directional mass N.

Time arguments of the equilibria follow the shifted clock used throughout:
V(t, .) is built with T = t + 1, and radial_equilibrium_C takes T itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import erfcx

from .datum import InitialDatum, as_cloud
from .geometry import LN2, PolarPoint, check_dimension, distance_from_cos, lambda1, log_sinh, m_d, sphere_area
from .kernel import log_kernel
from .sphere import SphericalSamples, zonal_nodes


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError(f"time must be positive, got {t!r}")


def gaussian(t: float, r):
    """Gamma(t, r) = t^{-1/2} exp(-r^2/4t)."""
    _check_t(t)
    r = np.asarray(r, dtype=float)
    out = np.exp(-r * r / (4.0 * t)) / math.sqrt(t)
    return out if out.ndim else float(out)


# -- mass-matching constant ------------------------------------------------------

def _tail_integral(d: int, T: float) -> float:
    """int_0^inf [1 - (1 - e^{-2r})^{d-1}] e^{(d-1)r/2 - r^2/4T} dr."""
    k = d - 1

    def f(r):
        g = -math.expm1(k * math.log1p(-math.exp(-2.0 * r))) if r > 0 else 1.0
        return g * math.exp(k * r / 2.0 - r * r / (4.0 * T))

    split = max(1.0, k * T)
    a, ea = integrate.quad(f, 0.0, split, epsabs=0.0, epsrel=1e-12, limit=400)
    b, eb = integrate.quad(f, split, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    val, err = a + b, ea + eb
    if not np.isfinite(val) or err > 1e-8 * abs(val):
        raise ArithmeticError(f"tail quadrature failed (d={d}, T={T})")
    return val


def log_mass_deficit(d: int, T: float) -> float:
    """log delta(T), where C(T) = C_inf / (1 - delta(T)).

    With c = (d-1)T the mass integral is
    int_0^inf (1-e^{-2r})^{d-1} e^{-(r-c)^2/4T} dr = 2 sqrt(pi T) (1 - delta),
    and delta collects the half-line cut of the Gaussian plus the defect of
    (1-e^{-2r})^{d-1} from 1; both carry the factor e^{-lambda_1 T}.
    """
    d = check_dimension(d)
    _check_t(T)
    lam = lambda1(d)
    body = math.sqrt(math.pi * T) * erfcx(math.sqrt(lam * T)) + _tail_integral(d, T)
    return -lam * T + math.log(body) - math.log(2.0 * math.sqrt(math.pi * T))


def radial_C_inf(d: int, mass: float) -> float:
    return 2.0 ** (d - 2) * mass / math.sqrt(math.pi)


def radial_equilibrium_C(d: int, mass: float, T: float) -> float:
    """C(T) with mass = (C/sqrt T) int_0^inf sinh^{d-1}(r) e^{-(r+(d-1)T)^2/4T} dr.

    Callers on the physical clock pass T = t + 1.
    """
    if not mass >= 0:
        raise ValueError("mass must be nonnegative")
    delta = math.exp(log_mass_deficit(d, T))
    return radial_C_inf(d, mass) / (1.0 - delta)


def radial_C_excess(d: int, mass: float, T: float) -> float:
    """C(T) - C_inf without cancellation."""
    delta = math.exp(log_mass_deficit(d, T))
    return radial_C_inf(d, mass) * delta / (1.0 - delta)


def radial_C_log_rate(d: int, T: float, rel_step: float = 1e-3) -> float:
    """d ln C / dT by central differences of -log1p(-delta) with step rel_step * T."""
    h = rel_step * T
    lo = -math.log1p(-math.exp(log_mass_deficit(d, T - h)))
    hi = -math.log1p(-math.exp(log_mass_deficit(d, T + h)))
    return (hi - lo) / (2.0 * h)


def radial_C_bounds(d: int, mass: float, T: float) -> tuple[float, float]:
    """Lower and upper bounds on C(T); the upper one needs sqrt(pi) > e^{-lambda_1 T/4}/sqrt(lambda_1 T)."""
    lam = lambda1(d)
    lower = radial_C_inf(d, mass)
    gap = math.sqrt(math.pi) - math.exp(-lam * T / 4.0) / math.sqrt(lam * T)
    if gap <= 0:
        return lower, math.inf
    upper = 2.0 ** (d - 2) * mass / ((-math.expm1(-(d - 1) * T)) ** (d - 1) * gap)
    return lower, upper


# -- transient equilibria -----------------------------------------------------------

def radial_equilibrium_V(d: int, mass: float, t: float, r):
    """C(t+1) sinh^{d-1}(r) exp(-(r + (d-1)(t+1))^2 / 4(t+1)); its integral in r is mass sqrt(t+1)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    T = t + 1.0
    r = np.asarray(r, dtype=float)
    if mass == 0:
        return np.zeros_like(r) if r.ndim else 0.0
    logC = math.log(radial_equilibrium_C(d, mass, T))
    with np.errstate(divide="ignore"):
        out = np.exp(logC + (d - 1) * log_sinh(r) - (r + (d - 1) * T) ** 2 / (4.0 * T))
    return out if out.ndim else float(out)


def horo_equilibrium_V(d: int, mass: float, t: float, r):
    """mass * exp(-(r - (d-1)(t+1))^2 / 4(t+1))."""
    if t < 0:
        raise ValueError("t must be >= 0")
    check_dimension(d)
    T = t + 1.0
    r = np.asarray(r, dtype=float)
    out = mass * np.exp(-(r - (d - 1) * T) ** 2 / (4.0 * T))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TransientEquilibrium:
    d: int
    kind: str
    mass: float

    def __post_init__(self):
        check_dimension(self.d)
        if self.kind not in ("radial", "horospheric"):
            raise ValueError("kind must be radial or horospheric")
        if not self.mass > 0:
            raise ValueError("equilibrium mass must be positive")

    def C(self, t: float) -> float:
        if self.kind == "horospheric":
            return self.mass
        return radial_equilibrium_C(self.d, self.mass, t + 1.0)

    def __call__(self, t: float, r):
        if self.kind == "radial":
            return radial_equilibrium_V(self.d, self.mass, t, r)
        return horo_equilibrium_V(self.d, self.mass, t, r)


# -- phi, Phi, N ----------------------------------------------------------------------

def log_phi(d: int, r_y, cos_angle, one_minus_cos=None):
    """-(d-1) log(cosh r_y - sinh r_y cos); the bracket is written as a sum of positives."""
    r_y = np.asarray(r_y, dtype=float)
    c = np.clip(np.asarray(cos_angle, dtype=float), -1.0, 1.0)
    omc = 1.0 - c if one_minus_cos is None else np.asarray(one_minus_cos, dtype=float)
    with np.errstate(divide="ignore"):
        bracket = np.logaddexp(r_y + np.log(omc), -r_y + np.log1p(c)) - LN2
    return -(d - 1) * bracket


def phi(d: int, y: PolarPoint, theta_x) -> float:
    """[cosh r_y - sinh r_y <theta_x, theta_y>]^{-(d-1)}."""
    d = check_dimension(d)
    c = float(np.dot(np.asarray(theta_x, float), y.theta))
    return float(np.exp(log_phi(d, y.r, c)))


def phi_ratio_limit_check(d: int, y: PolarPoint, theta, ell: float, t_sequence) -> list[float]:
    """G_d(t, dist(p_t, y)) / G_d(t, r_l(t)), p_t = (r_l(t), theta), r_l(t) = (d-1)t + ell.

    Evaluated as a difference of log-kernels, so large t does not underflow.
    """
    d = check_dimension(d)
    ts = [float(t) for t in t_sequence]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_sequence must be increasing")
    if abs(ell) >= math.sqrt(min(ts)):
        raise ValueError("need |ell| < sqrt(min t)")
    c = float(np.dot(np.asarray(theta, float), y.theta))
    out = []
    for t in ts:
        rl = (d - 1) * t + ell
        lam = float(distance_from_cos(rl, y.r, c))
        out.append(math.exp(log_kernel(d, t, lam) - log_kernel(d, t, rl)))
    return out


def memory_Phi(d: int, u0, theta_grid: SphericalSamples) -> SphericalSamples:
    """Phi(theta) = int u0(y) phi(y, theta) dmu(y) at each sphere node."""
    d = check_dimension(d)
    if theta_grid.d != d:
        raise ValueError("sphere grid dimension mismatch")
    if isinstance(u0, InitialDatum) and u0.representation == "radial_table":
        # phi concentrates near theta = theta_y at large r_y; integrate shells zonally
        g = u0.table
        c, omc, w = zonal_nodes(d)
        shell = np.exp(log_phi(d, g.nodes[:, None], c[None, :], omc[None, :])) @ w
        total = float(np.sum(g.values * g.weights * shell))
        return theta_grid.with_values(np.full(len(theta_grid.weights), total))
    cloud = as_cloud(u0, d)
    if cloud.mass == 0:
        return theta_grid.with_values(np.zeros(len(theta_grid.weights)))
    cos = theta_grid.nodes @ cloud.theta.T
    vals = np.exp(log_phi(d, cloud.r[None, :], cos)) @ cloud.weights
    return theta_grid.with_values(vals)


def radial_gl_nodes(r_max: float, panel: float = 1.0, order: int = 8):
    """Composite Gauss-Legendre nodes and weights on [0, r_max]."""
    n = max(1, int(math.ceil(r_max / panel)))
    edges = np.linspace(0.0, r_max, n + 1)
    x, w = leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    return (lo + (x + 1.0) * (hi - lo) / 2.0).ravel(), (w * (hi - lo) / 2.0).ravel()


def directional_mass(d: int, u, t: float, theta_grid: SphericalSamples, r_max: float | None = None,
                     panel: float = 1.0, order: int = 8, width: float = 12.0) -> SphericalSamples:
    """N(t, theta) = int_0^inf u(t, r, theta) sinh^{d-1}(r) dr.

    u is an evaluator u(r, theta) -> array of shape (len(r), len(theta)).
    The r-range defaults to the mass bulk (d-1)t + width sqrt(t+1) plus a margin.
    """
    d = check_dimension(d)
    _check_t(t)
    if r_max is None:
        r_max = (d - 1) * t + width * math.sqrt(t + 1.0) + 10.0
    r, wr = radial_gl_nodes(r_max, panel, order)
    vals = np.asarray(u(r, theta_grid.nodes), dtype=float)
    if vals.shape != (len(r), len(theta_grid.weights)):
        raise ValueError("evaluator must return shape (len(r), len(theta))")
    dens = np.exp((d - 1) * log_sinh(r))
    return theta_grid.with_values((wr * dens) @ vals)
