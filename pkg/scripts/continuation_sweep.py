"""Mean-field continuation in rho1 (rho2 fixed) with a CSV trace.

    python3 scripts/continuation_sweep.py --stop 24 --step 1 --out sweep.csv
"""

import argparse
import sys

from sglab import MeanFieldProblem, build_grid, continuation
from sglab.io import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-r", type=int, default=128)
    ap.add_argument("--n-theta", type=int, default=32)
    ap.add_argument("--stop", type=float, default=24.0)
    ap.add_argument("--step", type=float, default=1.0)
    ap.add_argument("--rho2", type=float, default=0.0)
    ap.add_argument("--h1", default="const:1")
    ap.add_argument("--h2", default="const:1")
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--out", help="CSV path (default: stdout)")
    a = ap.parse_args()

    n = int(round(a.stop / a.step))
    path = [(k * a.step, a.rho2) for k in range(n + 1)]
    problem = MeanFieldProblem(build_grid(a.n_r, a.n_theta), a.h1, a.h2)
    res = continuation(problem, path, tol=a.tol)
    rows = []
    for rep in res.reports:
        m = {r: s1 for r, s1, _ in rep.masses_at_radii}
        conc = m[0.1] / m[1.0] if m[1.0] > 0 else float("nan")
        rows.append((rep.rho1, rep.rho2, rep.newton_iters, rep.final_residual_norm, rep.sup_norm, m[0.1], m[1.0], conc))
    text = csv_text(["rho1", "rho2", "newton_iters", "residual", "sup_norm", "sigma1_0.1", "sigma1_1.0", "concentration"], rows)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not res.complete:
        print(f"stalled at step {res.failed_at} (rho1={path[res.failed_at][0]:g})", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
