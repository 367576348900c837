"""One test per acceptance criterion.  Each prints a PASS/FAIL line, and the
terminal summary repeats them all."""

import time

import numpy as np

from conftest import grid
from oracles import radial_meanfield
from sglab import (
    BubbleSpec,
    CoefficientPair,
    Field,
    MeanFieldProblem,
    SyntheticFamily,
    bubble_field,
    classify_quantization,
    continuation,
    green_function,
    group_bubbles,
    pde_residual,
    pohozaev_consistency,
    pohozaev_report,
    select_bubbles,
    solve_mean_field,
    synth_family,
)
from sglab.analysis import BubbleDisk, average_slope, disk_masses
from sglab.grid import area_integral
from sglab.pohozaev import M_MAX, quantization_target
from sglab.solver import normalized_masses

ONE = CoefficientPair("const:1", "const:1", one_signed=True)
TWO = CoefficientPair("const:1", "const:1")


def finish(record, number, checks, t0, budget):
    elapsed = time.perf_counter() - t0
    checks = dict(checks, runtime=elapsed < budget)
    failed = [k for k, ok in checks.items() if not ok]
    shown = failed or [k for k in checks if any(c.isdigit() for c in k)]
    detail = f"({elapsed:.1f}s of {budget:g}s)" + (" failed: " if failed else " ") + "; ".join(shown)
    record(number, not failed, detail)
    assert not failed, detail


def test_criterion_1_classifier_exactness(acceptance_record):
    t0 = time.perf_counter()
    worst_d = worst_c = 0.0
    for m in range(M_MAX + 1):
        for o in ("A", "B"):
            t = quantization_target(m, o)
            worst_d = max(worst_d, classify_quantization(*t).distance)
            worst_c = max(worst_c, pohozaev_consistency(*t))
    finish(acceptance_record, 1, {"distance 0": worst_d == 0.0, "consistency <= 1e-9": worst_c <= 1e-9}, t0, 1.0)


def test_criterion_2_single_bubble(acceptance_record):
    t0 = time.perf_counter()
    u = bubble_field(BubbleSpec((0.0, 0.0), 200.0), grid(256))
    sel = select_bubbles(u, ONE)
    checks = {"one disk": len(sel) == 1}
    if len(sel) == 1:
        d = sel[0]
        s1, s2 = disk_masses(u, ONE, d.center, d.l)
        poh = pohozaev_report(u, ONE, d.center, d.l)
        q = classify_quantization(max(s1, 0.0), max(s2, 0.0))
        checks.update({
            "masses near (4,0)": np.hypot(s1 - 4.0, s2) <= 0.05,
            "pohozaev residual": poh.residual_identity <= 0.1,
            "validity": poh.valid,
            "m = 1": q.m == 1,
            "distance": q.distance <= 0.05,
        })
    finish(acceptance_record, 2, checks, t0, 30.0)


def test_criterion_3_derivative_identity(acceptance_record):
    t0 = time.perf_counter()
    p = MeanFieldProblem(grid(256), "const:1", "const:1", 1.0, 0.0)
    # the residual floor at 256x256 sits near 1e-9
    u, rep = solve_mean_field(p, tol=1e-8)
    worst = 0.0
    for r, s1, s2 in normalized_masses(p, u, [0.25, 0.5, 0.75]):
        expect = (s2 - s1) / r
        worst = max(worst, abs(average_slope(u, r) - expect) / abs(expect))
    finish(acceptance_record, 3, {"converged": rep.converged, f"relative error {worst:.1e} <= 1e-5": worst <= 1e-5}, t0, 60.0)


def test_criterion_4_radial_oracle(acceptance_record):
    t0 = time.perf_counter()
    checks = {}
    for rho in (1.0, 3.0):
        u, rep = solve_mean_field(MeanFieldProblem(grid(128), "const:1", "const:1", rho, 0.0), tol=1e-8)
        a, sup = radial_meanfield(rho)
        e0 = abs(u.center - a) / abs(a)
        es = abs(rep.sup_norm - sup) / sup
        checks[f"rho={rho:g} u(0) {e0:.1e}"] = rep.converged and e0 <= 1e-5
        checks[f"rho={rho:g} sup {es:.1e}"] = rep.converged and es <= 1e-5
    finish(acceptance_record, 4, checks, t0, 60.0)


def test_criterion_5_selection_recovery(acceptance_record):
    t0 = time.perf_counter()
    truth = [((0.0, 0.0), 1), ((0.4, 0.0), -1), ((-0.2, 0.35), 1)]
    g = grid(256)
    u = synth_family(SyntheticFamily(tuple(BubbleSpec(c, 200.0, s) for c, s in truth)), g)
    sel = list(select_bubbles(u, TWO))
    checks = {"three disks": len(sel) == 3}
    if len(sel) == 3:
        matched = []
        for c, s in truth:
            d = min(sel, key=lambda d: np.hypot(d.center[0] - c[0], d.center[1] - c[1]))
            matched.append(d)
            checks[f"center {c}"] = np.hypot(d.center[0] - c[0], d.center[1] - c[1]) <= 2 * g.cell_size(np.hypot(*c))
            checks[f"sign {c}"] = d.sign == s
            checks[f"fit {c}"] = d.fit_quality <= 0.05
        checks["distinct"] = len({id(d) for d in matched}) == 3
        checks["disjoint"] = all(
            np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1]) >= a.l + b.l
            for i, a in enumerate(sel) for b in sel[i + 1:]
        )
        # a fourth cluster 50 diameters away stays its own group
        far = BubbleDisk((60.0, 0.0), 0.01, 1, 10.0, 1e-3)
        groups = group_bubbles(sel + [far])
        parts = sorted(len(gr.members) for gr in groups)
        checks["partition"] = parts == [1, 3] and any(gr.members == [far] or list(gr.members) == [far] for gr in groups)
    finish(acceptance_record, 5, checks, t0, 60.0)


def test_criterion_6_swap_symmetry(acceptance_record):
    t0 = time.perf_counter()
    P, Q = "linear:1,0.4", "gauss:0.6,-0.2,0.1,0.35"
    p = MeanFieldProblem(grid(128), P, Q, 2.0, 1.0)
    g0 = Field.from_function(p.grid, lambda x, y: 0.1 * (1 - x * x - y * y) + 0.05 * x)
    u, r1 = solve_mean_field(p, g0, tol=1e-7)
    v, r2 = solve_mean_field(MeanFieldProblem(grid(128), Q, P, 1.0, 2.0), -g0, tol=1e-7)
    err = float(np.max(np.abs(v.flat + u.flat)))
    finish(acceptance_record, 6, {"converged": r1.converged and r2.converged, f"max diff {err:.1e} <= 1e-9": err <= 1e-9}, t0, 60.0)


def test_criterion_7_compactness_probe(acceptance_record):
    t0 = time.perf_counter()
    p = MeanFieldProblem(grid(128, 32), "const:1", "const:1")
    res = continuation(p, [(0.5 * k, 0.0) for k in range(15)], tol=1e-7)
    sups = np.array([r.sup_norm for r in res.reports])
    checks = {
        "0->7 complete": res.complete and len(res.reports) == 15 and all(r.converged for r in res.reports),
        f"sup {sups.max():.2f} <= 5": sups.max() <= 5.0,
        "sup increasing": bool(np.all(np.diff(sups) > 0)),
    }
    far = continuation(p, [(float(k), 0.0) for k in range(25)], tol=1e-6)
    conc = [dict((r, s1) for r, s1, _ in rep.masses_at_radii) for rep in far.reports]
    ratios = np.array([c[0.1] / c[1.0] for c in conc[1:]])
    last = ratios[-5:]
    checks[f"0->24 reached rho={far.reports[-1].rho1:g}"] = far.complete
    checks["concentration increasing over last 5"] = len(last) == 5 and bool(np.all(np.diff(last) > 0))
    finish(acceptance_record, 7, checks, t0, 300.0)


def test_criterion_8_quadrature_green(acceptance_record):
    t0 = time.perf_counter()
    area = area_integral(grid(128), lambda x, y: np.ones_like(x))
    rng = np.random.default_rng(8)

    def pts(n):
        r = 0.95 * np.sqrt(rng.uniform(0, 1, n))
        t = rng.uniform(0, 2 * np.pi, n)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    t = rng.uniform(0, 2 * np.pi, 100)
    bnd = float(np.max(np.abs(green_function(np.stack([np.cos(t), np.sin(t)], -1), pts(100)))))
    x, e = pts(100), pts(100)
    sym = float(np.max(np.abs(green_function(x, e) - green_function(e, x))))
    errs = []
    for n in (64, 128, 256):
        r = pde_residual(bubble_field(BubbleSpec((0.0, 0.0), 10.0), grid(n)), ONE)
        errs.append(max(abs(r.center), float(np.abs(r.values[:-1]).max())))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    checks = {
        f"area error {abs(area - np.pi):.1e}": abs(area - np.pi) <= 1e-10,
        f"green boundary {bnd:.1e}": bnd <= 1e-12,
        f"green symmetry {sym:.1e}": sym <= 1e-12,
        f"residual orders {np.round(orders, 2).tolist()}": bool(np.all(orders >= 1.8)),
    }
    finish(acceptance_record, 8, checks, t0, 60.0)
