"""Relative entropy and entropy production in the self-similar frame.

With t = e^tau - 1 and r = (d-1)e^tau + e^{tau/2} rho, a snapshot u(t, r)
becomes v(tau, rho) = e^{tau/2} w(r) u, w = sinh^{d-1}(r) (radial) or
e^{(d-1)r} (horospheric), and int v drho equals the conserved mass.

Quadrature in rho uses the weights omega_i = m_i e^{-tau/2} / w(r_i) carried
over from the solver grid, so that sum omega_i v_i is exactly the discrete
mass.  Frames built directly on a rho grid use trapezoid weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .datum import GridFunction
from .geometry import check_dimension, log_cosh, log_sinh
from .profiles import radial_equilibrium_C

MASS_RTOL = 1e-6
TRUNCATION = 1e-16


def rho0(d: int, tau: float) -> float:
    """Left end -(d-1)e^{tau/2} of the radial frame (the image of r = 0)."""
    return -(d - 1) * math.exp(tau / 2.0)


def r_of_rho(d: int, tau: float, rho):
    return (d - 1) * math.exp(tau) + math.exp(tau / 2.0) * np.asarray(rho, dtype=float)


def rho_of_r(d: int, tau: float, r):
    return (np.asarray(r, dtype=float) - (d - 1) * math.exp(tau)) * math.exp(-tau / 2.0)


def _log_w(kind, d, r):
    if kind == "horospheric":
        return (d - 1) * np.asarray(r, dtype=float)
    return (d - 1) * log_sinh(r)


def trapezoid_weights(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2.0
    w[1:] += dx / 2.0
    return w


@dataclass
class SelfSimilarFrame:
    d: int
    kind: str
    tau: float
    rho_nodes: np.ndarray
    v_values: np.ndarray
    weights: np.ndarray = field(default=None, repr=False)
    r_nodes: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        check_dimension(self.d)
        if self.kind not in ("radial", "horospheric"):
            raise ValueError("kind must be radial or horospheric")
        self.rho_nodes = np.asarray(self.rho_nodes, dtype=float)
        self.v_values = np.asarray(self.v_values, dtype=float)
        if self.rho_nodes.shape != self.v_values.shape:
            raise ValueError("rho_nodes and v_values must have the same shape")
        if np.any(self.v_values < 0) or not np.all(np.isfinite(self.v_values)):
            raise ValueError("v must be finite and nonnegative")
        if self.kind == "radial":
            lo = rho0(self.d, self.tau)
            if np.any(self.rho_nodes < lo - 1e-12 * max(1.0, abs(lo))):
                raise ValueError("radial frame nodes must satisfy rho >= rho_0(tau)")
        if self.weights is None:
            self.weights = trapezoid_weights(self.rho_nodes)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.r_nodes is None:
            self.r_nodes = r_of_rho(self.d, self.tau, self.rho_nodes)

    @property
    def t(self) -> float:
        return math.expm1(self.tau)

    @property
    def rho0(self) -> float:
        return rho0(self.d, self.tau)

    def mass(self) -> float:
        return float(self.weights @ self.v_values)

    def with_values(self, v) -> "SelfSimilarFrame":
        return SelfSimilarFrame(self.d, self.kind, self.tau, self.rho_nodes, v, self.weights, self.r_nodes)


def line_frame(rho, v, weights=None) -> SelfSimilarFrame:
    """A bare density on a rho grid, with no boundary constraint (tau = 0)."""
    return SelfSimilarFrame(2, "horospheric", 0.0, rho, v, weights)


def to_self_similar(g: GridFunction, kind: str | None = None, allow_zero: bool = False) -> SelfSimilarFrame:
    kind = kind or g.kind
    if kind != g.kind:
        raise ValueError(f"grid function is {g.kind}, not {kind}")
    if not (g.t > 0 or (allow_zero and g.t == 0)):
        raise ValueError("self-similar variables need t > 0")
    tau = math.log1p(g.t)
    lw = _log_w(kind, g.d, g.nodes)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        v = np.where(g.values > 0, np.exp(tau / 2.0 + lw + np.log(np.where(g.values > 0, g.values, 1.0))), 0.0)
        weights = np.exp(g.log_weights - tau / 2.0 - lw)
    if kind == "radial" and g.nodes[0] == 0.0:
        # the r = 0 node carries no v-mass: v vanishes there
        weights[0] = 0.0
        v[0] = 0.0
    return SelfSimilarFrame(g.d, kind, tau, rho_of_r(g.d, tau, g.nodes), v, weights, g.nodes.copy())


def initial_frame(g: GridFunction, kind: str | None = None) -> SelfSimilarFrame:
    """Frame at tau = 0 (t = 0), where rho = r - (d-1) and v = w(r) u."""
    return to_self_similar(g.with_values(g.values, t=0.0), kind, allow_zero=True)


def from_self_similar(frame: SelfSimilarFrame, u_at_origin: float | None = None) -> GridFunction:
    """Inverse change of variables; u at r = 0 is not recoverable from v and is passed separately."""
    tau = frame.tau
    lw = _log_w(frame.kind, frame.d, frame.r_nodes)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        u = np.where(frame.v_values > 0,
                     np.exp(np.log(np.where(frame.v_values > 0, frame.v_values, 1.0)) - tau / 2.0 - lw), 0.0)
        log_weights = np.log(frame.weights) + tau / 2.0 + lw
    if frame.kind == "radial" and frame.r_nodes[0] == 0.0:
        u[0] = 0.0 if u_at_origin is None else u_at_origin
        log_weights[0] = -np.inf
    return GridFunction(frame.kind, frame.d, frame.r_nodes.copy(), u, math.expm1(tau), log_weights)


# -- reference profiles ---------------------------------------------------------------

def log_V1(d: int, tau: float, rho, C: float = 1.0):
    """log[C sinh^{d-1}(r(tau, rho)) exp(-(rho + 2(d-1)e^{tau/2})^2 / 4)]."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.maximum(r_of_rho(d, tau, rho), 0.0)
        out = math.log(C) + (d - 1) * log_sinh(r) - (rho + 2 * (d - 1) * math.exp(tau / 2.0)) ** 2 / 4.0
    return out


def log_V2(d: int, tau: float, rho, C: float = 1.0):
    """log[C cosh^{d-1}(r(tau, rho)) exp(-(rho + 2(d-1)e^{tau/2})^2 / 4)]."""
    rho = np.asarray(rho, dtype=float)
    r = r_of_rho(d, tau, rho)
    return math.log(C) + (d - 1) * log_cosh(r) - (rho + 2 * (d - 1) * math.exp(tau / 2.0)) ** 2 / 4.0


def radial_V_rho(d: int, mass: float, tau: float, rho):
    """Transient equilibrium in the frame, with C from the mass identity at T = e^tau."""
    C = radial_equilibrium_C(d, mass, math.exp(tau))
    return np.exp(log_V1(d, tau, rho, C))


def horo_V_rho(mass: float, rho):
    """Unit-shape Gaussian e^{-rho^2/4} scaled to carry `mass` in drho."""
    rho = np.asarray(rho, dtype=float)
    return mass * np.exp(-rho * rho / 4.0) / (2.0 * math.sqrt(math.pi))


def _matched(frame: SelfSimilarFrame, values):
    """Rescale reference values so that their discrete mass equals that of v."""
    vals = np.asarray(values, dtype=float)
    m_ref = float(frame.weights @ vals)
    m_v = frame.mass()
    if m_ref <= 0:
        raise ValueError("reference has no mass on the frame grid")
    return vals * (m_v / m_ref)


def radial_reference(d: int):
    """Builder frame -> V on the frame nodes, mass-matched on the grid."""

    def build(frame: SelfSimilarFrame):
        return _matched(frame, radial_V_rho(d, frame.mass(), frame.tau, frame.rho_nodes))

    return build


def horo_reference():
    def build(frame: SelfSimilarFrame):
        return _matched(frame, horo_V_rho(frame.mass(), frame.rho_nodes))

    return build


def directional_reference(d: int, N: float | None = None):
    """N V with V the unit-mass radial equilibrium; N defaults to the mass along the frame."""

    def build(frame: SelfSimilarFrame):
        n = frame.mass() if N is None else N
        vals = n * radial_V_rho(d, 1.0, frame.tau, frame.rho_nodes)
        return vals if N is not None else _matched(frame, vals)

    return build


REFERENCES = {"radial": radial_reference, "horo": lambda d: horo_reference(), "directional": directional_reference}


# -- entropy functionals ------------------------------------------------------------

@dataclass(frozen=True)
class EntropyReport:
    tau: float
    H: float
    D: float
    l1_gap: float
    mass: float

    @property
    def t(self) -> float:
        return math.expm1(self.tau)

    @property
    def ck_lhs(self) -> float:
        return self.l1_gap ** 2

    @property
    def ck_rhs(self) -> float:
        return 2.0 * self.mass * self.H


def _ref_values(frame: SelfSimilarFrame, ref):
    if callable(ref):
        return np.asarray(ref(frame.rho_nodes), dtype=float)
    vals = np.asarray(ref, dtype=float)
    if vals.shape != frame.rho_nodes.shape:
        raise ValueError("reference values must match the frame nodes")
    return vals


def relative_entropy(frame: SelfSimilarFrame, ref) -> EntropyReport:
    """H = int v ln(v/ref) and D = int v |d_rho ln(v/ref)|^2 on the frame grid.

    ref is a callable of rho or an array of values at the frame nodes.
    """
    v = frame.v_values
    F = _ref_values(frame, ref)
    w = frame.weights
    m_v, m_F = float(w @ v), float(w @ F)
    if abs(m_v - m_F) > MASS_RTOL * max(abs(m_v), abs(m_F)):
        raise ValueError(f"mass mismatch: int v = {m_v:.10g}, int ref = {m_F:.10g}")
    keep = (v >= TRUNCATION * v.max()) | (F >= TRUNCATION * F.max()) if m_v > 0 else F > 0
    if np.any(keep & (v > 0) & (F <= 0)):
        raise ValueError("reference vanishes where v > 0")
    pos = keep & (v > 0)
    with np.errstate(divide="ignore", under="ignore"):
        log_ratio = np.log(np.maximum(v[pos], 1e-300)) - np.log(np.maximum(F[pos], 1e-300))
    H = float(np.sum(w[pos] * v[pos] * log_ratio))
    if np.count_nonzero(pos) >= 2:
        grad = np.gradient(log_ratio, frame.rho_nodes[pos], edge_order=1)
        D = float(np.sum(w[pos] * v[pos] * grad * grad))
    else:
        D = 0.0
    l1 = float(np.sum(w[keep] * np.abs(v[keep] - F[keep])))
    return EntropyReport(frame.tau, H, D, l1, m_v)


@dataclass(frozen=True)
class EntropySeries:
    reports: tuple
    rate: float
    rate_stderr: float
    window: tuple

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, k):
        return self.reports[k]


def fit_entropy_rate(reports: Sequence[EntropyReport], tau_window=None) -> tuple[float, float, tuple]:
    """Least-squares slope of ln H against tau, with its standard error."""
    taus = np.array([r.tau for r in reports])
    H = np.array([r.H for r in reports])
    sel = H > 0
    if tau_window is not None:
        sel &= (taus >= tau_window[0]) & (taus <= tau_window[1])
    x, y = taus[sel], np.log(H[sel])
    if len(x) < 2:
        return math.nan, math.nan, (math.nan, math.nan)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    if len(x) > 2:
        s2 = float(np.sum((y - A @ coef) ** 2)) / (len(x) - 2)
        se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    else:
        se = 0.0
    return float(coef[0]), se, (float(x.min()), float(x.max()))


def entropy_decay_series(snapshots: Sequence[GridFunction], ref_builder: Callable, tau_window=None) -> EntropySeries:
    """Entropy report per snapshot plus the fitted exponential rate of H in tau."""
    ts = [g.t for g in snapshots]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("snapshots must be ordered by increasing t")
    reports = []
    for g in snapshots:
        frame = to_self_similar(g)
        reports.append(relative_entropy(frame, ref_builder(frame)))
    rate, se, window = fit_entropy_rate(reports, tau_window)
    return EntropySeries(tuple(reports), rate, se, window)


@dataclass(frozen=True)
class LSIResult:
    H: float
    D: float
    ratio: float

    def holds(self, slack: float = 1e-8) -> bool:
        return self.H <= self.D + slack


def log_sobolev_check(ref, trial_densities, rho=None, weights=None) -> list[LSIResult]:
    """H(g|ref) and D(g|ref) for each trial g, sharing one rho grid.

    ref and trials are arrays on rho (or callables of rho), or frames.
    The ratio D/H is reported as 1 when H vanishes.
    """
    out = []
    for g in trial_densities:
        if isinstance(g, SelfSimilarFrame):
            frame = g
        else:
            if rho is None:
                raise ValueError("rho grid needed for array trials")
            vals = g(rho) if callable(g) else g
            frame = line_frame(rho, vals, weights)
        rep = relative_entropy(frame, ref)
        H, D = max(rep.H, 0.0), rep.D
        ratio = 1.0 if H <= 1e-14 * max(rep.mass, 1e-300) else D / H
        out.append(LSIResult(rep.H, D, ratio))
    return out
