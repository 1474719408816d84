"""Regenerate tests/oracles/oracles.json with mpmath at 30 digits.

Independent of the package: every value is computed from the textbook
formulas for the kernels and the mass integral, with tanh-sinh quadrature.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30


def G3(t, r):
    t, r = mp.mpf(t), mp.mpf(r)
    shape = mp.mpf(1) if r == 0 else r / mp.sinh(r)
    return (4 * mp.pi * t) ** mp.mpf(-1.5) * shape * mp.exp(-t - r * r / (4 * t))


def G2(t, r):
    t, r = mp.mpf(t), mp.mpf(r)
    # s = r + w^2 removes the inverse square root at s = r;
    # cosh s - cosh r = 2 sinh(r + w^2/2) sinh(w^2/2) avoids cancellation
    def f(w):
        s = r + w * w
        return 2 * w * s * mp.exp(-s * s / (4 * t)) / mp.sqrt(2 * mp.sinh(r + w * w / 2) * mp.sinh(w * w / 2))

    val = mp.quad(f, [0, 1, 3, mp.inf])
    return mp.sqrt(2) * mp.exp(-t / 4) / (4 * mp.pi * t) ** mp.mpf(1.5) * val


def step_up(G, d, t, r):
    """G_{d+2} = -e^{-d t} / (2 pi sinh r) dG_d/dr."""
    t, r = mp.mpf(t), mp.mpf(r)
    return -mp.exp(-d * t) / (2 * mp.pi * mp.sinh(r)) * mp.diff(lambda x: G(t, x), r)


def C(d, mass, T):
    T = mp.mpf(T)
    f = lambda r: mp.sinh(r) ** (d - 1) * mp.exp(-(r + (d - 1) * T) ** 2 / (4 * T))
    return mass * mp.sqrt(T) / mp.quad(f, [0, 1, 5, 20, mp.inf])


def ratio(G, d, t, ry, c):
    t, ry, c = mp.mpf(t), mp.mpf(ry), mp.mpf(c)
    rl = (d - 1) * t
    lam = mp.acosh(mp.cosh(rl) * mp.cosh(ry) - mp.sinh(rl) * mp.sinh(ry) * c)
    return G(t, lam) / G(t, rl)


def main():
    out = {
        "G3": [[t, r, str(G3(t, r))] for t, r in [(1, 0), (1, 1), (0.5, 3), (5, 10), (20, 30)]],
        "G2": [[t, r, str(G2(t, r))] for t, r in [(1, 0), (1, 0.5), (1, 2), (1, 10), (0.5, 1), (5, 8)]],
        "G5": [[t, r, str(step_up(G3, 3, t, r))] for t, r in [(1, 1), (0.5, 2), (2, 5)]],
        "G4": [[t, r, str(step_up(G2, 2, t, r))] for t, r in [(1, 1), (2, 3)]],
        "C": [[d, T, str(C(d, 1, T))] for d in (2, 3) for T in (2, 5, 20)],
        "phi_ratio_t40": [[d, ry, c, str(ratio(G3 if d == 3 else G2, d, 40, ry, c))]
                          for d, ry, c in [(3, 1, 1), (3, 2, -1), (3, 0.5, 0), (2, 1, 0), (2, 0.5, 1)]],
    }
    path = Path(__file__).resolve().parents[1] / "tests" / "oracles" / "oracles.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
