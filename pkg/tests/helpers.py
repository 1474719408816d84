"""Randomized densities shared by the entropy and acceptance tests."""

import numpy as np

from hyperheat.entropy import log_V1, log_V2, rho0, trapezoid_weights


def smooth_log_perturbation(rng, rho, max_modes=4):
    """A few random sinusoids plus a random tilt; a smooth bounded-slope log-perturbation."""
    A = np.zeros_like(rho)
    for _ in range(int(rng.integers(1, max_modes + 1))):
        A += rng.normal() * rng.uniform(0.1, 1.5) * np.sin(rng.uniform(0.1, 2.0) * rho + rng.uniform(0.0, 6.3))
    A += rng.normal() * 0.3 * rho
    return A - A.max()


def lsi_grid(d, tau, n=6001):
    lo = rho0(d, tau)
    return np.linspace(lo, lo + 2.0 * (d - 1) * np.exp(tau / 2.0) + 30.0, n)


def reference_on(kind, d, tau, rho):
    """Unit-mass V1 (sinh-type) or V2 (cosh-type) on rho, discretely normalized."""
    lv = log_V1 if kind == "V1" else log_V2
    F = np.exp(lv(d, tau, rho) - np.max(lv(d, tau, rho)))
    w = trapezoid_weights(rho)
    return F / (w @ F), w


def matched_trials(rng, F, w, rho, n):
    out = []
    for _ in range(n):
        g = F * np.exp(smooth_log_perturbation(rng, rho))
        out.append(g * ((w @ F) / (w @ g)))
    return out
