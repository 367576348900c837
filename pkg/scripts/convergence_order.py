"""Refinement study: quadrature error of a bubble mass and the discrete PDE
residual of a Liouville bubble on a ladder of grids."""

import argparse

import numpy as np

from sglab import BubbleSpec, CoefficientPair, area_integral, build_grid, bubble_field, pde_residual


def exact_mass(lam, r=1.0):
    # (1/2pi) int_{B_r} 8 lam^2 / (1 + lam^2 s^2)^2
    return 4.0 * (lam * r) ** 2 / (1.0 + (lam * r) ** 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--lam", type=float, default=10.0)
    a = ap.parse_args()

    pair = CoefficientPair("const:1", "const:1", one_signed=True)
    spec = BubbleSpec((0.0, 0.0), a.lam)
    print(f"{'n':>5} {'mass error':>12} {'order':>6} {'residual':>12} {'order':>6}")
    prev = None
    for n in a.sizes:
        g = build_grid(n, n)
        m = area_integral(g, lambda x, y: 8 * a.lam**2 / (1 + a.lam**2 * (x * x + y * y)) ** 2) / (2 * np.pi)
        em = abs(m - exact_mass(a.lam))
        r = pde_residual(bubble_field(spec, g), pair)
        er = max(abs(r.center), float(np.abs(r.values[:-1]).max()))
        if prev is None:
            print(f"{n:>5} {em:12.3e} {'':>6} {er:12.3e} {'':>6}")
        else:
            om = np.log2(prev[0] / em) if em > 0 else float("inf")
            orr = np.log2(prev[1] / er)
            print(f"{n:>5} {em:12.3e} {om:6.2f} {er:12.3e} {orr:6.2f}")
        prev = (em, er)


if __name__ == "__main__":
    main()
