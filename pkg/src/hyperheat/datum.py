"""Sampled densities on 1D grids and initial data built from bump atoms or tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from .geometry import (
    PolarPoint,
    boost_to,
    check_dimension,
    from_hyperboloid,
    log_sinh,
    sphere_area,
    to_hyperboloid,
)
from .sphere import sphere_grid

KINDS = ("radial", "horospheric")


def cell_log_measures(kind: str, d: int, nodes) -> np.ndarray:
    """log of the exact measure of the dual cell around each node.

    Dual cells run between midpoints; the end nodes own half cells. The
    density is sinh^{d-1}(r) for radial grids and e^{(d-1)r} for horospheric.
    """
    nodes = np.asarray(nodes, dtype=float)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    lo = np.concatenate([[nodes[0]], mid])
    hi = np.concatenate([mid, [nodes[-1]]])
    return interval_log_measure(kind, d, lo, hi)


def interval_log_measure(kind: str, d: int, lo, hi) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k = d - 1
    if kind == "horospheric":
        with np.errstate(divide="ignore"):
            return k * hi + np.log1p(-np.exp(-k * (hi - lo))) - math.log(k)
    if kind != "radial":
        raise ValueError(f"unknown grid kind {kind!r}")
    x, w = leggauss(8)
    pts = lo[:, None] + (x[None, :] + 1.0) * (hi - lo)[:, None] / 2.0
    with np.errstate(divide="ignore"):
        terms = np.log(w)[None, :] + k * log_sinh(pts)
        return np.log((hi - lo) / 2.0) + logsumexp(terms, axis=1)


def face_log_weights(kind: str, d: int, nodes) -> np.ndarray:
    """log of the measure density at the midpoints between nodes."""
    nodes = np.asarray(nodes, dtype=float)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    if kind == "horospheric":
        return (d - 1) * mid
    return (d - 1) * log_sinh(mid)


@dataclass
class GridFunction:
    """Density u on a strictly increasing 1D grid with dual-cell measure weights.

    For radial grids the weights exclude the sphere factor |S^{d-1}|, so
    mass() is the radial mass int u sinh^{d-1} dr.
    """

    kind: str
    d: int
    nodes: np.ndarray
    values: np.ndarray
    t: float = 0.0
    log_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        check_dimension(self.d)
        self.nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if self.nodes.shape != values.shape or self.nodes.ndim != 1 or len(self.nodes) < 2:
            raise ValueError("nodes and values must be 1D arrays of equal length >= 2")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.kind == "radial" and self.nodes[0] < 0:
            raise ValueError("radial nodes must be >= 0")
        if np.any(values < -1e-12 * max(1.0, np.max(np.abs(values)))) or not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite and nonnegative")
        self.values = np.maximum(values, 0.0)
        if self.log_weights is None:
            self.log_weights = cell_log_measures(self.kind, self.d, self.nodes)

    @property
    def weights(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_weights)

    def mass(self) -> float:
        with np.errstate(divide="ignore"):
            terms = np.log(self.values) + self.log_weights
        if np.all(np.isneginf(terms)):
            return 0.0
        return float(np.exp(logsumexp(terms)))

    def full_mass(self) -> float:
        """Mass on all of H^d: radial mass times |S^{d-1}|; horospheric mass as is."""
        return self.mass() * (sphere_area(self.d) if self.kind == "radial" else 1.0)

    def with_values(self, values, t=None) -> "GridFunction":
        return replace(self, values=np.asarray(values, dtype=float), t=self.t if t is None else t)


# -- bumps ------------------------------------------------------------------

def bump(w, width):
    """C-infinity bump exp(-w^2/(width^2 - w^2)) supported on |w| < width."""
    w = np.asarray(w, dtype=float)
    inside = np.abs(w) < width
    ww = np.where(inside, w * w, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(inside, np.exp(-ww / (width * width - ww)), 0.0)
    return out


@lru_cache(maxsize=256)
def radial_bump_norm(d: int, width: float) -> float:
    """|S^{d-1}| int_0^width bump(w) sinh^{d-1}(w) dw."""
    val, _ = integrate.quad(lambda w: float(bump(w, width)) * math.sinh(w) ** (d - 1), 0.0, width,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return sphere_area(d) * val


@lru_cache(maxsize=256)
def horo_bump_norm(d: int, center: float, width: float) -> float:
    """int bump(r - center) e^{(d-1) r} dr."""
    val, _ = integrate.quad(lambda x: float(bump(x, width)) * math.exp((d - 1) * x), -width, width,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return math.exp((d - 1) * center) * val


@dataclass(frozen=True)
class Atom:
    """Bump of total mass `mass` in the hyperbolic distance to `center`."""

    center: PolarPoint
    mass: float
    width: float

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("atom mass must be positive and finite")
        if not self.width > 0:
            raise ValueError("atom width must be positive")


@dataclass(frozen=True)
class HoroBump:
    """Bump in the horospheric coordinate r with horospherical mass `mass`."""

    center: float
    mass: float
    width: float

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("bump mass must be positive and finite")
        if not self.width > 0:
            raise ValueError("bump width must be positive")


@dataclass(frozen=True)
class InitialDatum:
    """Initial density: a mixture of atoms, a radial or horospheric table, or horospheric bumps.

    representation is one of "atom_mixture", "radial_table", "horo_table",
    "horo_bumps".  A zero datum is allowed (empty mixture) and propagates
    to the zero solution.
    """

    representation: str
    d: int
    atoms: tuple = ()
    table: GridFunction | None = None

    def __post_init__(self):
        check_dimension(self.d)
        rep = self.representation
        if rep in ("atom_mixture", "horo_bumps"):
            if self.table is not None:
                raise ValueError("mixtures carry no table")
            want = Atom if rep == "atom_mixture" else HoroBump
            if not all(isinstance(a, want) for a in self.atoms):
                raise TypeError(f"{rep} needs {want.__name__} entries")
            if rep == "atom_mixture" and any(a.center.d != self.d for a in self.atoms):
                raise ValueError("atom centers must live in the datum's dimension")
        elif rep in ("radial_table", "horo_table"):
            kind = "radial" if rep == "radial_table" else "horospheric"
            if self.table is None or self.table.kind != kind or self.table.d != self.d:
                raise ValueError(f"{rep} needs a {kind} GridFunction of dimension {self.d}")
        else:
            raise ValueError(f"unknown representation {rep!r}")
        if not math.isfinite(self.mass):
            raise ValueError("datum mass must be finite")

    # constructors
    @classmethod
    def atom_mixture(cls, atoms, d=None):
        atoms = tuple(atoms)
        if d is None:
            if not atoms:
                raise ValueError("dimension needed for an empty mixture")
            d = atoms[0].center.d
        return cls("atom_mixture", d, atoms)

    @classmethod
    def radial_bump(cls, d: int, mass: float = 1.0, width: float = 1.0):
        origin = PolarPoint(0.0, np.eye(d)[0])
        return cls("atom_mixture", d, (Atom(origin, mass, width),))

    @classmethod
    def horo_bumps(cls, d: int, bumps):
        return cls("horo_bumps", d, tuple(bumps))

    @classmethod
    def radial_table(cls, g: GridFunction):
        return cls("radial_table", g.d, table=g)

    @classmethod
    def horo_table(cls, g: GridFunction):
        return cls("horo_table", g.d, table=g)

    @classmethod
    def zero(cls, d: int, kind: str = "radial"):
        return cls("horo_bumps" if kind == "horospheric" else "atom_mixture", d, ())

    # queries
    @property
    def kind(self) -> str:
        return "horospheric" if self.representation in ("horo_table", "horo_bumps") else "radial"

    @property
    def mass(self) -> float:
        """Total mass: full-space for radial/atoms, horospherical for horospheric data."""
        if self.representation in ("atom_mixture", "horo_bumps"):
            return float(sum(a.mass for a in self.atoms))
        return self.table.full_mass()

    def is_radial(self) -> bool:
        if self.representation == "radial_table":
            return True
        if self.representation == "atom_mixture":
            return all(a.center.r == 0.0 for a in self.atoms)
        return False

    def radial_density(self, r):
        """u0 as a function of r for radially symmetric data."""
        r = np.asarray(r, dtype=float)
        if not self.is_radial():
            raise ValueError("datum is not radially symmetric")
        if self.representation == "radial_table":
            g = self.table
            spline = CubicSpline(g.nodes, g.values)
            inside = (r >= g.nodes[0]) & (r <= g.nodes[-1])
            return np.where(inside, np.maximum(spline(np.clip(r, g.nodes[0], g.nodes[-1])), 0.0), 0.0)
        out = np.zeros_like(r)
        for a in self.atoms:
            out += a.mass / radial_bump_norm(self.d, a.width) * bump(r, a.width)
        return out

    def horo_density(self, r):
        r = np.asarray(r, dtype=float)
        if self.representation == "horo_table":
            g = self.table
            spline = CubicSpline(g.nodes, g.values)
            inside = (r >= g.nodes[0]) & (r <= g.nodes[-1])
            return np.where(inside, np.maximum(spline(np.clip(r, g.nodes[0], g.nodes[-1])), 0.0), 0.0)
        if self.representation != "horo_bumps":
            raise ValueError("datum is not horospheric")
        out = np.zeros_like(r)
        for b in self.atoms:
            out += b.mass / horo_bump_norm(self.d, b.center, b.width) * bump(r - b.center, b.width)
        return out

    def support(self) -> tuple[float, float]:
        """Interval in r (radial polar radius or horospheric coordinate) holding the datum."""
        if self.table is not None:
            nz = np.nonzero(self.table.values)[0]
            if len(nz) == 0:
                return (self.table.nodes[0], self.table.nodes[0])
            return (float(self.table.nodes[nz[0]]), float(self.table.nodes[nz[-1]]))
        if not self.atoms:
            return (0.0, 0.0)
        if self.representation == "horo_bumps":
            return (min(b.center - b.width for b in self.atoms), max(b.center + b.width for b in self.atoms))
        return (0.0, max(a.center.r + a.width for a in self.atoms))

    def density(self, r, theta):
        """Pointwise u0 at polar points (r, theta), theta of shape (..., d)."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.representation == "radial_table":
            return self.radial_density(r)
        if self.representation != "atom_mixture":
            raise ValueError("pointwise density needs polar data")
        from .geometry import distance_from_cos

        out = np.zeros(np.broadcast_shapes(r.shape, theta.shape[:-1]))
        for a in self.atoms:
            w = distance_from_cos(r, a.center.r, theta @ a.center.theta)
            out += a.mass / radial_bump_norm(self.d, a.width) * bump(w, a.width)
        return out


# -- quadrature clouds --------------------------------------------------------

@dataclass(frozen=True)
class QuadratureCloud:
    """Weighted points (polar form) whose weights integrate a datum: sum = mass."""

    r: np.ndarray
    theta: np.ndarray
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def atom_cloud(atom: Atom, d: int, n_w: int = 24, n_sphere: int = 32) -> QuadratureCloud:
    """Quadrature of one atom: Gauss-Legendre in distance w times a sphere grid at the center."""
    x, gw = leggauss(n_w)
    w = (x + 1.0) * atom.width / 2.0
    gw = gw * atom.width / 2.0
    sph = sphere_grid(d, n_sphere)
    dens = bump(w, atom.width) * np.sinh(w) ** (d - 1) * gw
    W = (dens[:, None] * sph.weights[None, :]).ravel()
    W *= atom.mass / W.sum()
    local = to_hyperboloid(np.repeat(w, len(sph.weights)), np.tile(sph.nodes, (n_w, 1)))
    B = boost_to(atom.center)
    r, theta = from_hyperboloid(local @ B.T)
    return QuadratureCloud(r, theta, W)


def table_cloud(g: GridFunction, n_sphere: int = 32) -> QuadratureCloud:
    sph = sphere_grid(g.d, n_sphere)
    keep = g.values > 0
    r = np.repeat(g.nodes[keep], len(sph.weights))
    theta = np.tile(sph.nodes, (int(keep.sum()), 1))
    W = ((g.values * g.weights)[keep][:, None] * sph.weights[None, :]).ravel()
    return QuadratureCloud(r, theta, W)


def as_cloud(u0, d: int, n_w: int = 24, n_sphere: int = 32) -> QuadratureCloud:
    if isinstance(u0, QuadratureCloud):
        return u0
    if u0.d != d:
        raise ValueError("datum dimension does not match")
    if u0.representation == "radial_table":
        return table_cloud(u0.table, n_sphere)
    if u0.representation != "atom_mixture":
        raise ValueError("superposition needs polar data")
    if not u0.atoms:
        return QuadratureCloud(np.zeros(0), np.zeros((0, d)), np.zeros(0))
    parts = [atom_cloud(a, d, n_w, n_sphere) for a in u0.atoms]
    return QuadratureCloud(np.concatenate([p.r for p in parts]),
                           np.concatenate([p.theta for p in parts]),
                           np.concatenate([p.weights for p in parts]))
