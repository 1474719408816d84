"""Random search for the smallest D/H against the V1 / V2 references.

    python3 scripts/lsi_probe.py --trials 2000 --seed 0
"""

import argparse

import numpy as np

from hyperheat.entropy import log_sobolev_check, log_V1, log_V2, rho0, trapezoid_weights


def perturbation(rng, rho):
    A = np.zeros_like(rho)
    for _ in range(int(rng.integers(1, 5))):
        A += rng.normal() * rng.uniform(0.1, 1.5) * np.sin(rng.uniform(0.1, 2.0) * rho + rng.uniform(0.0, 6.3))
    A += rng.normal() * 0.3 * rho
    return A - A.max()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=3001, help="grid points")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("ref d  tau   min D/H")
    for name, lv in (("V1", log_V1), ("V2", log_V2)):
        for d in (2, 3):
            for tau in (0.5, 1.0, 2.0):
                lo = rho0(d, tau)
                rho = np.linspace(lo, lo + 2.0 * (d - 1) * np.exp(tau / 2.0) + 30.0, args.n)
                w = trapezoid_weights(rho)
                F = np.exp(lv(d, tau, rho) - lv(d, tau, rho).max())
                F /= w @ F
                trials = []
                for _ in range(args.trials):
                    g = F * np.exp(perturbation(rng, rho))
                    trials.append(g * (w @ F) / (w @ g))
                worst = min(r.ratio for r in log_sobolev_check(F, trials, rho, w))
                print(f"{name}  {d}  {tau:<4g}  {worst:.4f}")


if __name__ == "__main__":
    main()
