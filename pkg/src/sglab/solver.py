"""Newton continuation for the Dirichlet mean-field problem on the unit disk

    Lap u + rho1 H1 e^u / int(H1 e^u) - rho2 H2 e^{-u} / int(H2 e^{-u}) = 0,
    u = 0 on the boundary.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import operators
from .fields import EXP_LIMIT, Coefficient, CoefficientPair, Field, as_coefficient, node_coords, validate_coefficients
from .grid import DiskGrid, area_integral

log = logging.getLogger(__name__)

DEFAULT_RADII = (0.1, 0.25, 0.5, 0.75, 1.0)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class MeanFieldProblem:
    grid: DiskGrid
    H1: Coefficient
    H2: Coefficient
    rho1: float = 0.0
    rho2: float = 0.0
    bc: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "H1", as_coefficient(self.H1))
        object.__setattr__(self, "H2", as_coefficient(self.H2))
        if self.rho1 < 0 or self.rho2 < 0:
            raise ValueError(f"rho must be non-negative, got ({self.rho1}, {self.rho2})")
        if self.bc != 0.0:
            raise ValueError("only homogeneous Dirichlet data is supported")
        # raises on non-positive weights
        validate_coefficients(CoefficientPair(self.H1, self.H2, bound_C=np.inf), self.grid)

    def at(self, rho1: float, rho2: float) -> "MeanFieldProblem":
        return MeanFieldProblem(self.grid, self.H1, self.H2, float(rho1), float(rho2), self.bc)

    def swapped(self) -> "MeanFieldProblem":
        return MeanFieldProblem(self.grid, self.H2, self.H1, self.rho2, self.rho1, self.bc)


@dataclass
class SolveReport:
    converged: bool
    newton_iters: int
    final_residual_norm: float
    sup_norm: float
    masses_at_radii: List[Tuple[float, float, float]] = field(default_factory=list)
    rho1: float = 0.0
    rho2: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["masses_at_radii"] = [list(t) for t in self.masses_at_radii]
        return d


class _System:
    """Residual and Jacobian pieces for one problem, on interior unknowns."""

    def __init__(self, problem: MeanFieldProblem):
        g = problem.grid
        self.p = problem
        self.n_int = 1 + (g.n_r - 1) * g.n_theta
        lap = operators.laplacian_matrix(g)
        self.L = lap[: self.n_int, : self.n_int].tocsc()
        x, y = node_coords(g)
        self.H1 = np.broadcast_to(problem.H1(x, y), x.shape).astype(float)
        self.H2 = np.broadcast_to(problem.H2(x, y), x.shape).astype(float)
        self.w = np.concatenate([[0.0], np.repeat(g.ring_weights, g.n_theta)])

    def full(self, u_int: np.ndarray) -> np.ndarray:
        out = np.zeros(self.p.grid.n_nodes)
        out[: self.n_int] = u_int
        return out

    def terms(self, u_int):
        u = self.full(u_int)
        if np.max(np.abs(u)) > EXP_LIMIT:
            return None
        a1 = self.H1 * np.exp(u)
        a2 = self.H2 * np.exp(-u)
        return a1, a2, float(self.w @ a1), float(self.w @ a2)

    def residual(self, u_int, terms=None):
        t = terms if terms is not None else self.terms(u_int)
        if t is None:
            return None
        a1, a2, i1, i2 = t
        n = self.n_int
        return operators.apply_laplacian(self.p.grid, self.full(u_int))[:n] + self.p.rho1 * a1[:n] / i1 - self.p.rho2 * a2[:n] / i2

    def newton_step(self, u_int, F, terms):
        a1, a2, i1, i2 = terms
        n = self.n_int
        r1, r2 = self.p.rho1, self.p.rho2
        diag = r1 * a1[:n] / i1 + r2 * a2[:n] / i2
        A = (self.L + sp.diags(diag, format="csc")).tocsc()
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise SolverError(f"sparse factorization failed: {exc}") from exc
        U = np.column_stack([r1 * a1[:n] / i1**2, r2 * a2[:n] / i2**2])
        V = np.column_stack([self.w[:n] * a1[:n], self.w[:n] * a2[:n]])
        rhs = np.column_stack([-F, U])
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise SolverError("linear solve produced non-finite values")
        z, Y = sol[:, 0], sol[:, 1:]
        # (A - U V^T)^{-1} by Sherman-Morrison-Woodbury
        cap = np.eye(2) - V.T @ Y
        return z + Y @ np.linalg.solve(cap, V.T @ z)


def normalized_masses(problem: MeanFieldProblem, u: Field, radii: Sequence[float] = DEFAULT_RADII):
    """``(r, sigma1(r), sigma2(r))`` of the normalized nonlinearities on ``B_r(0)``."""
    sys_ = _System(problem)
    a1, a2, i1, i2 = sys_.terms(u.flat[: sys_.n_int])
    out = []
    g = problem.grid
    for r in radii:
        if r >= g.radius:
            s1 = problem.rho1 * float(sys_.w @ a1) / i1
            s2 = problem.rho2 * float(sys_.w @ a2) / i2
        else:
            s1 = problem.rho1 / i1 * area_integral(g, lambda x, y: problem.H1(x, y) * np.exp(u.sample(x, y)), ((0.0, 0.0), r))
            s2 = problem.rho2 / i2 * area_integral(g, lambda x, y: problem.H2(x, y) * np.exp(-u.sample(x, y)), ((0.0, 0.0), r))
        out.append((float(r), s1 / (2 * np.pi), s2 / (2 * np.pi)))
    return out


def effective_pair(problem: MeanFieldProblem, u: Field) -> CoefficientPair:
    """Weights ``rho_i H_i / int(H_i e^{+-u})`` turning the problem into the
    unnormalized equation for this particular ``u``."""
    sys_ = _System(problem)
    _, _, i1, i2 = sys_.terms(u.flat[: sys_.n_int])
    c1, c2 = problem.rho1 / i1, problem.rho2 / i2
    h1 = Coefficient(f"{c1!r}*({problem.H1.spec})", lambda x, y: c1 * problem.H1(x, y))
    if c2 > 0:
        h2 = Coefficient(f"{c2!r}*({problem.H2.spec})", lambda x, y: c2 * problem.H2(x, y))
        return CoefficientPair(h1, h2, bound_C=np.inf)
    return CoefficientPair(h1, problem.H2, bound_C=np.inf, one_signed=True)


def solve_mean_field(
    problem: MeanFieldProblem,
    initial_guess: Optional[Field] = None,
    tol: float = 1e-6,
    max_iters: int = 50,
    radii: Sequence[float] = DEFAULT_RADII,
) -> Tuple[Field, SolveReport]:
    """Damped Newton iteration with the exact Jacobian.

    Non-convergence is reported through ``SolveReport.converged``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = problem.grid
    sys_ = _System(problem)
    if initial_guess is None:
        u = np.zeros(sys_.n_int)
    else:
        if initial_guess.grid != g:
            raise ValueError("initial guess lives on a different grid")
        u = initial_guess.flat[: sys_.n_int].copy()
    terms = sys_.terms(u)
    if terms is None:
        raise SolverError("initial guess overflows the exponential")
    F = sys_.residual(u, terms)
    nrm = float(np.max(np.abs(F)))
    iters = 0
    while nrm > tol and iters < max_iters:
        du = sys_.newton_step(u, F, terms)
        iters += 1
        t = 1.0
        for _ in range(21):
            trial = u + t * du
            tt = sys_.terms(trial)
            if tt is not None:
                Ft = sys_.residual(trial, tt)
                nt = float(np.max(np.abs(Ft)))
                if nt < nrm:
                    break
            t *= 0.5
        else:
            log.info("line search failed at iteration %d (residual %.3e)", iters, nrm)
            break
        u, F, terms, nrm = trial, Ft, tt, nt
    sol = Field.from_flat(g, sys_.full(u), f"meanfield(rho1={problem.rho1:g}, rho2={problem.rho2:g})")
    report = SolveReport(
        converged=bool(nrm <= tol),
        newton_iters=iters,
        final_residual_norm=nrm,
        sup_norm=sol.max_abs(),
        masses_at_radii=normalized_masses(problem, sol, radii),
        rho1=problem.rho1,
        rho2=problem.rho2,
    )
    return sol, report


@dataclass
class ContinuationResult:
    reports: List[SolveReport] = field(default_factory=list)
    fields: List[Field] = field(default_factory=list)
    blowup_flags: List[bool] = field(default_factory=list)
    failed_at: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.failed_at is None


def continuation(
    problem: MeanFieldProblem,
    path: Sequence[Tuple[float, float]],
    tol: float = 1e-6,
    max_iters: int = 30,
    max_bisections: int = 8,
    blowup_threshold: float = 12.0,
    radii: Sequence[float] = DEFAULT_RADII,
) -> ContinuationResult:
    """Warm-started solves along ``path``; failed steps are bisected."""
    result = ContinuationResult()
    current: Optional[Field] = None
    prev = None
    for k, (r1, r2) in enumerate(path):
        target = np.array([r1, r2], dtype=float)
        start = target if prev is None else prev
        step = target - start
        frac, bisections = 1.0, 0
        done = 0.0
        u = current
        ok = True
        while done < 1.0:
            frac = min(frac, 1.0 - done)
            rho = start + (done + frac) * step
            sol, rep = solve_mean_field(problem.at(*rho), u, tol, max_iters, radii)
            if rep.converged:
                u, done = sol, done + frac
                continue
            bisections += 1
            if bisections > max_bisections:
                ok = False
                break
            frac *= 0.5
        if not ok:
            log.warning("continuation stalled at step %d (rho=%s)", k, tuple(target))
            result.failed_at = k
            break
        current, prev = u, target
        result.reports.append(rep)
        result.fields.append(u)
        result.blowup_flags.append(rep.sup_norm > blowup_threshold)
    return result
