"""Heat kernel G_d(t, r) of hyperbolic space and its two-sided envelope.

Everything is computed in log space; the linear-space functions exponentiate
at the end and underflow to zero.

Both closed forms share the function h(s) = s exp(-s^2/4t) / sinh(s):

    G_3(t, r) = (4 pi t)^{-3/2} e^{-t} h(r)
    G_2(t, r) = sqrt(2) (4 pi t)^{-3/2} e^{-t/4} J[h](r),
    J[g](r)   = int_r^inf g(s) sinh(s) / sqrt(cosh s - cosh r) ds.

With D g = g'(s) / sinh(s), the dimension-raising identity
G_{d+2} = -e^{-dt} (2 pi sinh r)^{-1} dG_d/dr becomes

    G_{3+2k} = K_3 prod_j(-e^{-(3+2j)t} / 2 pi) D^k h(r)
    G_{2+2k} = K_2 prod_j(-e^{-(2+2j)t} / 2 pi) J[D^k h](r)

because d/dr J[g] = sinh(r) J[D g]; the sinh(r) cancels, so r = 0 needs no
special treatment.  D h and D^2 h are coded by hand and switch to their
Taylor series for s < 0.5 where the closed expressions cancel badly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.interpolate import CubicSpline

from .geometry import LN2, check_dimension, distance_from_cos, log_sinh, sphere_area
from .sphere import zonal_nodes

MAX_DIMENSION = 7
LOG_2PI = math.log(2.0 * math.pi)

# Taylor coefficients of exp(a s^2) D^k h(s) in powers s^0, s^2, ..., s^14;
# each row is (c0, c1, c2) for the polynomial c0 + c1 a + c2 a^2, a = 1/(4t).
_SERIES = {
    1: np.array([
        (-0.3333333333333333, -2.0, 0.0),
        (0.13333333333333333, 0.6666666666666666, 0.0),
        (-0.031746031746031744, -0.13333333333333333, 0.0),
        (0.005925925925925926, 0.021164021164021163, 0.0),
        (-0.000962000962000962, -0.002962962962962963, 0.0),
        (0.00014285068253322222, 0.0003848003848003848, 0.0),
        (-1.995261254520514e-05, -4.761689417774074e-05, 0.0),
        (2.6657530547975617e-06, 5.7007464414871826e-06, 0.0),
    ]),
    2: np.array([
        (0.26666666666666666, 2.0, 4.0),
        (-0.17142857142857143, -1.1333333333333333, -2.0),
        (0.06190476190476191, 0.3626984126984127, 0.5666666666666667),
        (-0.01663780663780664, -0.08695767195767196, -0.1208994708994709),
        (0.003718880326023183, 0.017461820586820588, 0.02173941798941799),
        (-0.0007324133097942622, -0.0031116511721670454, -0.0034923641173641175),
        (0.00013153356935453108, 0.0005090911103642586, 0.0005186085286945075),
        (-2.2022285402747236e-05, -7.814653108430341e-05, -7.272730148060836e-05),
    ]),
}
_SERIES_CUTOFF = 0.5
# sign of D^k h, constant in s
_SIGN = {0: 1.0, 1: -1.0, 2: 1.0}


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError(f"time must be positive, got {t!r}")


def log_dk_h(k: int, s, t: float):
    """log |D^k h(s)| with h(s) = s exp(-s^2/4t)/sinh(s), for k in {0, 1, 2}."""
    s = np.abs(np.asarray(s, dtype=float))
    a = 1.0 / (4.0 * t)
    gauss = -a * s * s
    ss = np.maximum(s, _SERIES_CUTOFF)
    log_csch = -log_sinh(ss)
    coth = 1.0 / np.tanh(ss)
    if k == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s > 0, s / np.sinh(np.minimum(s, 700.0)), 1.0)
        big = s > 30.0
        log_ratio = np.where(big, np.log(np.maximum(s, 1.0)) - log_sinh(np.maximum(s, 30.0)), np.log(ratio))
        return gauss + log_ratio
    if k == 1:
        body = 1.0 - 2.0 * a * ss * ss - ss * coth
        closed = 2.0 * log_csch + np.log(-body)
    elif k == 2:
        csch2 = np.exp(2.0 * log_csch)
        A = 1.0 - 2.0 * a * ss * ss - ss * coth
        dA = -4.0 * a * ss - coth + ss * csch2
        body = dA - 2.0 * (a * ss + coth) * A
        closed = 3.0 * log_csch + np.log(body)
    else:
        raise ValueError("only D^0, D^1, D^2 are implemented")
    coef = _SERIES[k]
    poly = coef[:, 0] + coef[:, 1] * a + coef[:, 2] * a * a
    s2 = np.minimum(s, _SERIES_CUTOFF) ** 2
    series = np.polynomial.polynomial.polyval(s2, poly)
    log_series = np.log(np.abs(series))
    return gauss + np.where(s < _SERIES_CUTOFF, log_series, closed)


@lru_cache(maxsize=None)
def _reference_nodes():
    """Gauss-Legendre nodes on [0, 1], geometrically graded towards 0."""
    edges = np.unique(np.concatenate([[0.0], np.geomspace(1e-4, 0.05, 6), np.linspace(0.05, 1.0, 12)]))
    x, w = leggauss(16)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (lo + (x[None, :] + 1.0) * (hi - lo) / 2.0).ravel()
    weights = (w[None, :] * (hi - lo) / 2.0).ravel()
    return nodes, weights


def _w_max(r, t, budget=60.0):
    """Cut-off in w = sqrt(s - r) past which the J integrand is below e^-budget of its bulk."""
    b = r / (2.0 * t) + 0.5
    x = 2.0 * t * (-b + np.sqrt(b * b + budget / t))
    return np.sqrt(x)


def _log_j_integrand(k, w, r, t):
    """log of 2 D^k h(s) sinh(s) / sqrt(sinh(r + w^2/2) sinh(w^2/2)/(w^2/2)), s = r + w^2."""
    x = w * w
    s = r + x
    half = x / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s_ratio = np.where(half < 1e-8, half * half / 6.0, log_sinh(half) - np.log(half))
    return LN2 + log_dk_h(k, s, t) + log_sinh(s) - 0.5 * (log_sinh(r + half) + log_s_ratio)


def log_j(k: int, r, t: float):
    """log J[D^k h](r) by graded composite Gauss-Legendre in w = sqrt(s - r)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    nodes, weights = _reference_nodes()
    wmax = _w_max(r, t)
    w = wmax[:, None] * nodes[None, :]
    lf = _log_j_integrand(k, w, r[:, None], t) + np.log(weights)[None, :] + np.log(wmax)[:, None]
    m = lf.max(axis=1)
    return m + np.log(np.exp(lf - m[:, None]).sum(axis=1))


def log_j_adaptive(k: int, r: float, t: float, rtol: float = 1e-10) -> float:
    """Scalar log J[D^k h](r) via adaptive quadrature (scipy quad)."""
    wmax = float(_w_max(np.asarray(r, float), t))
    probe = np.linspace(0.0, wmax, 401)[1:]
    peak = float(np.max(_log_j_integrand(k, probe, r, t)))

    def f(w):
        if w <= 0.0:
            return 0.0
        return float(np.exp(_log_j_integrand(k, np.asarray(w), r, t) - peak))

    pts = [wmax * p for p in (1e-3, 1e-2, 0.05, 0.2, 0.5)]
    val, err = integrate.quad(f, 0.0, wmax, epsabs=0.0, epsrel=rtol, limit=400, points=pts)
    if not np.isfinite(val) or val <= 0 or err > max(1e3 * rtol, 1e-8) * val:
        raise ArithmeticError(f"J quadrature did not converge (r={r}, t={t}, err={err})")
    return peak + math.log(val)


def _log_prefactor(d: int, t: float) -> float:
    """log of K_base * prod_j e^{-(base+2j)t}/(2 pi) for d = base + 2k."""
    base = 3 if d % 2 else 2
    k = (d - base) // 2
    if base == 3:
        lp = -1.5 * math.log(4.0 * math.pi * t) - t
    else:
        lp = 0.5 * LN2 - 1.5 * math.log(4.0 * math.pi * t) - t / 4.0
    for j in range(k):
        lp += -(base + 2 * j) * t - LOG_2PI
    return lp


def log_kernel(d: int, t: float, r, method: str = "table"):
    """ln G_d(t, r) for 2 <= d <= 7; r may be an array.

    method "table" uses the vectorised fixed-grid quadrature for even d;
    "adaptive" uses scipy quad per point (slow, independent error control).
    """
    d = check_dimension(d)
    if d > MAX_DIMENSION:
        raise ValueError(f"kernel evaluation is capped at d={MAX_DIMENSION}")
    _check_t(t)
    r_arr = np.abs(np.asarray(r, dtype=float))
    k = (d - 3) // 2 if d % 2 else (d - 2) // 2
    lp = _log_prefactor(d, t)
    if d % 2:
        out = lp + log_dk_h(k, r_arr, t)
    elif method == "adaptive":
        flat = [log_j_adaptive(k, float(x), t) for x in r_arr.ravel()]
        out = lp + np.asarray(flat).reshape(r_arr.shape)
    else:
        out = lp + log_j(k, r_arr.ravel(), t).reshape(r_arr.shape)
    return out if np.ndim(out) else float(out)


def eval_G3(t: float, r):
    """Closed-form three-dimensional kernel (4 pi t)^{-3/2} (r/sinh r) e^{-t - r^2/4t}."""
    return np.exp(log_kernel(3, t, r))


def eval_G2(t: float, r, rtol: float = 1e-10):
    """Two-dimensional kernel; scalar r goes through adaptive quadrature."""
    if np.ndim(r) == 0:
        return math.exp(log_kernel(2, t, float(r), method="adaptive"))
    return np.exp(log_kernel(2, t, r))


@dataclass(frozen=True)
class KernelSpec:
    """Dimension plus evaluation strategy for G_d.

    method: "closed_form_d3", "quadrature_d2", or "recurrence" (from the base
    of matching parity, 3 for odd d and 2 for even d).  diff_step_policy
    "analytic" differentiates the closed forms exactly; a float h instead
    applies the recurrence with central differences of relative step h.
    """

    d: int
    method: str = "auto"
    quad_tolerance: float = 1e-10
    diff_step_policy: object = "analytic"

    def __post_init__(self):
        d = check_dimension(self.d)
        if d > MAX_DIMENSION:
            raise ValueError(f"kernel evaluation is capped at d={MAX_DIMENSION}")
        method = self.method
        if method == "auto":
            method = {3: "closed_form_d3", 2: "quadrature_d2"}.get(d, "recurrence")
        if method == "closed_form_d3" and d != 3:
            raise ValueError("closed_form_d3 only applies to d=3")
        if method == "quadrature_d2" and d != 2:
            raise ValueError("quadrature_d2 only applies to d=2")
        if method not in ("closed_form_d3", "quadrature_d2", "recurrence"):
            raise ValueError(f"unknown kernel method {method!r}")
        if self.diff_step_policy != "analytic" and not float(self.diff_step_policy) > 0:
            raise ValueError("diff_step_policy must be 'analytic' or a positive step")
        object.__setattr__(self, "method", method)

    @property
    def base(self) -> int:
        return 3 if self.d % 2 else 2


def _log_fd_recurrence(d: int, t: float, r, h: float):
    """ln G_d by one recurrence step from d-2 with central differences."""
    r = np.abs(np.asarray(r, dtype=float))
    step = h * np.maximum(r, 1.0)
    lower = d - 2
    lo = np.abs(r - step)
    g_plus = log_kernel(lower, t, r + step)
    g_minus = log_kernel(lower, t, lo)
    # dG/dr = (G(r+h) - G(r-h)) / 2h, factored around G(r+h) to stay in log space
    with np.errstate(invalid="ignore"):
        log_diff = g_minus + np.log1p(-np.exp(g_plus - g_minus))
    log_dg = log_diff - np.log(2.0 * step)
    return -(d - 2) * t - LOG_2PI - log_sinh(np.maximum(r, 1e-300)) + log_dg


def eval_Gd(spec: KernelSpec, t: float, r, log: bool = False):
    """G_d(t, r) per the strategy in spec; returns ln G_d when log=True."""
    _check_t(t)
    if spec.diff_step_policy == "analytic" or spec.d == spec.base:
        out = log_kernel(spec.d, t, r, method="adaptive" if (spec.d % 2 == 0 and np.ndim(r) == 0) else "table")
    else:
        out = _log_fd_recurrence(spec.d, t, r, float(spec.diff_step_policy))
    return out if log else np.exp(out)


def log_envelope_hd(d: int, t: float, r):
    d = check_dimension(d)
    _check_t(t)
    r = np.asarray(r, dtype=float)
    return (-d / 2.0 * np.log(4.0 * math.pi * t) + (d - 3) / 2.0 * np.log1p(r + t)
            + np.log1p(r) - (r + (d - 1) * t) ** 2 / (4.0 * t))


def envelope_hd(d: int, t: float, r):
    """h_d(t,r) = (4 pi t)^{-d/2} (1+r+t)^{(d-3)/2} (1+r) e^{-(r+(d-1)t)^2/4t}."""
    out = np.exp(log_envelope_hd(d, t, r))
    return out if np.ndim(out) else float(out)


class KernelTable:
    """Cubic spline of ln G_d(t, .) on [0, r_max] for fast repeated lookup."""

    def __init__(self, d: int, t: float, r_max: float, spacing: float = 0.01, max_nodes: int = 20001):
        n = int(min(max_nodes, max(201, math.ceil(r_max / spacing) + 1)))
        self.d, self.t, self.r_max = d, t, float(r_max)
        self.nodes = np.linspace(0.0, self.r_max, n)
        values = log_kernel(d, t, self.nodes)
        self._spline = CubicSpline(self.nodes, values, bc_type=((1, 0.0), "not-a-knot"))
        self._h = self.nodes[1] - self.nodes[0]
        self._coef = [np.ascontiguousarray(row) for row in self._spline.c]  # highest power first

    def log(self, r):
        r = np.asarray(r, dtype=float)
        if r.size and np.max(r) > self.r_max * (1 + 1e-12):
            raise ValueError(f"distance {np.max(r)} beyond kernel table range {self.r_max}")
        # direct lookup on the uniform grid, cheaper than a binary search
        idx = np.minimum((r * (1.0 / self._h)).astype(np.intp), len(self.nodes) - 2)
        dx = r - idx * self._h
        c0, c1, c2, c3 = (c.take(idx) for c in self._coef)
        return ((c0 * dx + c1) * dx + c2) * dx + c3

    def __call__(self, r):
        return np.exp(self.log(r))


def normalization(d: int, t: float, n_panels: int = 200) -> float:
    """|S^{d-1}| int_0^inf G_d(t, r) sinh^{d-1}(r) dr by composite Gauss-Legendre."""
    center = (d - 1) * t
    width = 12.0 * math.sqrt(t) + 12.0
    hi = center + width + 10.0
    x, w = leggauss(20)
    edges = np.linspace(0.0, hi, n_panels + 1)
    lo_e, hi_e = edges[:-1, None], edges[1:, None]
    r = (lo_e + (x + 1.0) * (hi_e - lo_e) / 2.0).ravel()
    wt = (w * (hi_e - lo_e) / 2.0).ravel()
    lg = log_kernel(d, t, r) + (d - 1) * log_sinh(r)
    return float(sphere_area(d) * np.sum(wt * np.exp(lg)))


def shell_average(d: int, t: float, rx, ry, table: KernelTable):
    """int over S^{d-1} of G_d(t, dist((rx, theta), (ry, omega))) d omega; rx, ry broadcast.

    For d = 3, G_3(l) sinh(l) = K l e^{-l^2/4t} integrates in closed form over
    l in [|rx - ry|, rx + ry]; otherwise graded zonal quadrature.
    """
    rx = np.asarray(rx, dtype=float)
    ry = np.asarray(ry, dtype=float)
    if d == 3:
        lo, hi = np.abs(rx - ry), rx + ry
        k3 = math.exp(_log_prefactor(3, t))
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            # e^{-lo^2/4t} - e^{-hi^2/4t}, factored to keep relative accuracy
            diff = np.exp(-lo * lo / (4.0 * t)) * -np.expm1(-(hi * hi - lo * lo) / (4.0 * t))
            log_den = log_sinh(rx) + log_sinh(ry)
            val = 2.0 * math.pi * k3 * 2.0 * t * diff * np.exp(-log_den)
        small = (rx * ry) < 1e-12
        near = np.exp(table.log(np.maximum(rx, ry))) * 4.0 * math.pi
        return np.where(small, near, val)
    c, omc, w = zonal_nodes(d)
    lam = distance_from_cos(rx[..., None], ry[..., None], c, omc)
    return np.exp(table.log(lam)) @ w


def kernel_superposition(spec: KernelSpec, t: float, x, u0, table: KernelTable | None = None):
    """u(t, x) = int u0(y) G_d(t, dist(x, y)) dmu(y).

    Atom mixtures are summed over a quadrature cloud; radial tables use the
    shell average of the kernel, whose angular profile is too sharp for a
    fixed sphere grid at large radii.  x is a PolarPoint or a pair
    (r array, theta array of shape (..., d)).
    """
    from .datum import as_cloud

    if hasattr(x, "r"):
        rx, thx = np.asarray(x.r, float), np.asarray(x.theta, float)
    else:
        rx, thx = np.asarray(x[0], float), np.asarray(x[1], float)
    shape = np.broadcast_shapes(rx.shape, thx.shape[:-1])
    if getattr(u0, "representation", None) == "radial_table":
        g = u0.table
        keep = g.values > 0
        if not np.any(keep):
            return np.zeros(shape) if shape else 0.0
        ry, wy = g.nodes[keep], (g.values * g.weights)[keep]
        if table is None:
            table = KernelTable(spec.d, t, float(np.max(rx)) + float(ry[-1]) + 1.0)
        flat = np.broadcast_to(rx, shape).ravel()
        out = np.array([shell_average(spec.d, t, r, ry, table) @ wy for r in flat]).reshape(shape)
        return out if np.ndim(out) else float(out)
    cloud = as_cloud(u0, spec.d)
    if cloud.mass == 0.0:
        return np.zeros(shape) if shape else 0.0
    if table is None:
        table = KernelTable(spec.d, t, float(np.max(rx)) + float(np.max(cloud.r)) + 1.0)
    rx = np.broadcast_to(rx, shape).ravel()
    thx = np.broadcast_to(thx, shape + (thx.shape[-1],)).reshape(-1, thx.shape[-1])
    out = np.empty(rx.shape)
    block = max(1, 2_000_000 // len(cloud.weights))
    for i in range(0, len(rx), block):
        sl = slice(i, i + block)
        lam = distance_from_cos(rx[sl, None], cloud.r[None, :], thx[sl] @ cloud.theta.T)
        out[sl] = np.exp(table.log(lam)) @ cloud.weights
    out = out.reshape(shape)
    return out if np.ndim(out) else float(out)
