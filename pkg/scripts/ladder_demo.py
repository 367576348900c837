"""Decay-ladder scan of a concentric tower: a positive Liouville bubble of
scale lam inside a negative singular bubble of mass 12.  The construction is
an approximation; the script prints the achieved segments and the nearest
quantization points without asserting any target."""

import argparse

import numpy as np

from sglab import CoefficientPair, Field, build_grid, classify_quantization, decay_ladder_scan
from sglab.liouville import bubble_profile


def tower(lam):
    # mu^6 = lam^2 / 576 matches the two profiles at the junction scale
    mu = (lam**2 / 576) ** (1 / 6)

    def f(x, y):
        outer = -2 * np.log1p((mu * mu * (x * x + y * y)) ** 3)
        return bubble_profile(x, y, (0.0, 0.0), lam) - outer

    return f


def main():
    ap = argparse.ArgumentParser(description="ladder scan of a concentric tower")
    ap.add_argument("--lam", type=float, nargs="+", default=[200.0, 500.0, 1000.0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--radii", type=int, default=50)
    ap.add_argument("--threshold-n", type=float, default=5.0)
    a = ap.parse_args()

    grid = build_grid(a.n, a.n)
    pair = CoefficientPair("const:1", "const:1")
    for lam in a.lam:
        u = Field.from_function(grid, tower(lam), f"tower({lam:g})")
        rep = decay_ladder_scan(u, pair, (0.0, 0.0), 1e-3, 0.95, a.threshold_n, a.radii)
        print(f"lam = {lam:g}")
        for s in rep.segments:
            q = classify_quantization(max(s.sigma1, 0.0), max(s.sigma2, 0.0))
            slow = ",".join(s.slow) or "-"
            print(
                f"  {s.kind:<10} r in [{s.r_start:.4f}, {s.r_end:.4f}]  "
                f"sigma = ({s.sigma1:7.3f}, {s.sigma2:7.3f})  slow: {slow:<5} "
                f"nearest m={q.m}{q.orientation} at {q.distance:.3f}"
            )


if __name__ == "__main__":
    main()
