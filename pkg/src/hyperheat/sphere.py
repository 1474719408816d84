"""Quadrature grids on S^{d-1} and values sampled on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import check_dimension, sphere_area


@dataclass
class SphericalSamples:
    """Values at quadrature nodes on S^{d-1}; weights sum to |S^{d-1}|."""

    d: int
    nodes: np.ndarray  # (n, d) unit vectors
    weights: np.ndarray  # (n,)
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.values is None:
            self.values = np.zeros(len(self.weights))
        self.values = np.asarray(self.values, dtype=float)
        if abs(self.weights.sum() - sphere_area(self.d)) > 1e-10 * sphere_area(self.d):
            raise ValueError("sphere weights must sum to |S^{d-1}|")

    def with_values(self, values) -> "SphericalSamples":
        return SphericalSamples(self.d, self.nodes, self.weights, np.asarray(values, dtype=float))

    def integral(self) -> float:
        return float(self.weights @ self.values)

    def mean(self) -> float:
        return self.integral() / sphere_area(self.d)


def sphere_grid(d: int, n: int = 64) -> SphericalSamples:
    """Uniform trapezoid on S^1 (n points) or Gauss-Legendre in cos x uniform azimuth on S^2.

    For d = 3, n is the number of azimuths and n // 2 the number of polar nodes.
    """
    d = check_dimension(d)
    if d == 2:
        phi = 2.0 * math.pi * np.arange(n) / n
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return SphericalSamples(2, nodes, np.full(n, 2.0 * math.pi / n))
    if d == 3:
        x, w = leggauss(max(2, n // 2))
        az = 2.0 * math.pi * np.arange(n) / n
        c = np.repeat(x, n)
        s = np.sqrt(1.0 - c * c)
        a = np.tile(az, len(x))
        nodes = np.stack([c, s * np.cos(a), s * np.sin(a)], axis=1)
        return SphericalSamples(3, nodes, np.repeat(w, n) * (2.0 * math.pi / n))
    raise ValueError("sphere grids are implemented for d in {2, 3}")


@lru_cache(maxsize=None)
def zonal_nodes(d: int, n_geo: int = 16, n_uni: int = 12, order: int = 8):
    """Nodes c_k = cos(phi_k), 1 - c_k (accurate at tiny phi), and weights with sum_k w_k f(c_k) ~ int_{S^{d-1}} f(<theta, omega>) d omega.

    phi is integrated with composite Gauss-Legendre on panels refined
    geometrically towards phi = 0, where zonal integrands of points far from
    the origin concentrate.
    """
    d = check_dimension(d)
    edges = np.unique(np.concatenate([[0.0], np.geomspace(1e-8, 0.1, n_geo) * math.pi,
                                      np.linspace(0.1, 1.0, n_uni) * math.pi]))
    x, w = leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    phi = (lo + (x + 1.0) * (hi - lo) / 2.0).ravel()
    wphi = (w * (hi - lo) / 2.0).ravel()
    weights = sphere_area(d - 1) * np.sin(phi) ** (d - 2) * wphi if d > 2 else 2.0 * wphi
    return np.cos(phi), 2.0 * np.sin(phi / 2.0) ** 2, weights
