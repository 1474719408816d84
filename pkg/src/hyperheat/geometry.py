"""Coordinates, distances and volume weights on hyperbolic space H^d.

Points are handled in polar coordinates (r, theta) about a fixed origin, with
theta stored as a full unit vector in R^d, or in horospheric coordinates
(signed distance r to a horosphere, point y on it).  Where a computation needs
isometries (re-centering at an atom, for instance) the hyperboloid model
{X in R^{1,d} : X_0^2 - |X|^2 = 1, X_0 > 0} is used internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)


def check_dimension(d) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def lambda1(d: int) -> float:
    """Bottom of the L^2 spectrum of the Laplace-Beltrami operator, (d-1)^2/4."""
    return (check_dimension(d) - 1) ** 2 / 4.0


def m_d(d: int) -> float:
    """Exponent min(d-1, (d-1)^2/16) governing how fast C(t) settles."""
    d = check_dimension(d)
    return min(d - 1.0, (d - 1.0) ** 2 / 16.0)


def sphere_area(d: int) -> float:
    """|S^{d-1}|, the surface measure of the unit sphere in R^d."""
    d = check_dimension(d) if d >= 2 else d
    return 2.0 * math.pi ** (d / 2.0) / math.exp(gammaln(d / 2.0))


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if self.r < 0 or not np.isfinite(self.r):
            raise ValueError(f"polar radius must be finite and >= 0, got {self.r}")
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ValueError("theta must be a unit vector")
        object.__setattr__(self, "theta", theta)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def from_angle(cls, r: float, phi: float) -> "PolarPoint":
        """Point of H^2 at radius r and polar angle phi."""
        return cls(r, np.array([math.cos(phi), math.sin(phi)]))

    def hyperboloid(self) -> np.ndarray:
        return to_hyperboloid(self.r, self.theta)


@dataclass(frozen=True)
class HoroPoint:
    r: float
    y: np.ndarray

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if not (np.isfinite(self.r) and np.all(np.isfinite(y))):
            raise ValueError("horospheric coordinates must be finite")
        object.__setattr__(self, "y", y)


def distance_from_cos(rx, ry, cos_angle, one_minus_cos=None):
    """Hyperbolic law of cosines, vectorised over broadcastable arrays.

    Evaluated through sinh^2(lam/2) = sinh^2((rx-ry)/2) + sinh rx sinh ry (1-c)/2.
    Both terms are nonnegative, so there is no arccosh argument to clamp and
    nearly coincident points keep full relative accuracy; radii summing past
    600 switch to log form to avoid overflow.  Exactly symmetric in (rx, ry).  Pass one_minus_cos when it is
    known more accurately than 1 - cos_angle (tiny angles).
    """
    rx = np.asarray(rx, dtype=float)
    ry = np.asarray(ry, dtype=float)
    if one_minus_cos is None:
        omc = 1.0 - np.clip(np.asarray(cos_angle, dtype=float), -1.0, 1.0)
    else:
        omc = np.clip(np.asarray(one_minus_cos, dtype=float), 0.0, 2.0)
    if rx.size and ry.size and np.max(rx) + np.max(ry) < 600.0:
        sh = np.sinh((rx - ry) / 2.0)
        q = sh * sh + np.sinh(rx) * np.sinh(ry) * (omc / 2.0)
        return 2.0 * np.arcsinh(np.sqrt(q))
    with np.errstate(divide="ignore"):
        a = 2.0 * log_sinh(np.abs(rx - ry) / 2.0)
        b = log_sinh(rx) + log_sinh(ry) + np.log(omc / 2.0)
    log_q = np.logaddexp(a, b)
    half = 0.5 * log_q
    with np.errstate(over="ignore"):
        exact = 2.0 * np.arcsinh(np.exp(np.minimum(half, 20.0)))
    return np.where(half > 20.0, log_q + 2.0 * LN2, exact)


def hyperbolic_distance(x: PolarPoint, y: PolarPoint) -> float:
    return float(distance_from_cos(x.r, y.r, float(np.dot(x.theta, y.theta))))


def angle(theta_x, theta_y) -> float:
    """Angle in [0, pi] between two unit vectors."""
    c = float(np.dot(theta_x, theta_y))
    return math.acos(min(1.0, max(-1.0, c)))


def log_sinh(x):
    """log(sinh x) for x > 0 without overflow; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.sinh(np.minimum(x, 1.0)))
    large = x + np.log1p(-np.exp(-2.0 * np.maximum(x, 1.0))) - LN2
    return np.where(x < 1.0, small, large)


def log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - LN2


def log_radial_weight(d: int, r):
    """log sinh^{d-1}(r)."""
    return (d - 1) * log_sinh(r)


def radial_measure_weight(d: int, r):
    """sinh^{d-1}(r), the radial density of the volume form in polar coordinates.

    Switches to log-space evaluation for r > 30 so that large solver domains
    do not overflow intermediate products.
    """
    d = check_dimension(d)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial weight needs r >= 0")
    out = np.where(r > 30.0, np.exp(log_radial_weight(d, np.maximum(r, 30.0))), np.sinh(np.minimum(r, 30.0)) ** (d - 1))
    return out if out.ndim else float(out)


def horo_measure_weight(d: int, r):
    """e^{(d-1) r}, the density of the volume form in horospheric coordinates."""
    d = check_dimension(d)
    out = np.exp((d - 1) * np.asarray(r, dtype=float))
    return out if out.ndim else float(out)


# -- hyperboloid model -------------------------------------------------------

def to_hyperboloid(r, theta):
    """(cosh r, sinh r * theta); theta has shape (..., d)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.concatenate([np.cosh(r)[..., None], np.sinh(r)[..., None] * theta], axis=-1)


def from_hyperboloid(X):
    """Inverse of to_hyperboloid; the direction at the origin is returned as e_1."""
    X = np.asarray(X, dtype=float)
    vec = X[..., 1:]
    nrm = np.linalg.norm(vec, axis=-1)
    r = np.arcsinh(nrm)
    e1 = np.zeros(vec.shape[-1])
    e1[0] = 1.0
    safe = np.where(nrm > 0, nrm, 1.0)[..., None]
    theta = np.where((nrm > 0)[..., None], vec / safe, e1)
    return r, theta


def boost_to(center: PolarPoint) -> np.ndarray:
    """Lorentz matrix B with B @ (1, 0, ..., 0) = hyperboloid image of center.

    B is the pure boost along center.theta, so B^{-1} is B with the
    spatial-temporal off-diagonal blocks negated.
    """
    d = center.d
    ch, sh = math.cosh(center.r), math.sinh(center.r)
    u = center.theta
    B = np.eye(d + 1)
    B[0, 0] = ch
    B[0, 1:] = sh * u
    B[1:, 0] = sh * u
    B[1:, 1:] += (ch - 1.0) * np.outer(u, u)
    return B


def boost_inverse(B: np.ndarray) -> np.ndarray:
    Binv = B.copy()
    Binv[0, 1:] *= -1
    Binv[1:, 0] *= -1
    return Binv
