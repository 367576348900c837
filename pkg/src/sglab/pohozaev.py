"""Pohozaev balance on disks, the quantization set, and the disk Green function.

Masses are in units of ``2 pi``.  Every Pohozaev term below is divided by
``pi`` so that for a field with fast decay on the circle the balance reads
``4 (s1 + s2) = (s1 - s2)^2`` directly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import operators
from .analysis import THRESHOLD_N, DecayClass, _active_both_fast, _n_circle_samples, _pt, decay_class, mass_profile
from .fields import CoefficientPair, Field, node_coords
from .grid import LOCAL_PATCH, CircleProbe, area_integral

M_MAX = 50
ORIENTATIONS = ("A", "B")


# quantization ----------------------------------------------------------------


def quantization_target(m: int, orientation: str) -> Tuple[float, float]:
    """``A: (2m(m+1), 2m(m-1))``, ``B`` swapped."""
    a, b = 2.0 * m * (m + 1), 2.0 * m * (m - 1)
    if orientation == "A":
        return (a, b)
    if orientation == "B":
        return (b, a)
    raise ValueError(f"orientation must be 'A' or 'B', got {orientation!r}")


@dataclass(frozen=True)
class QuantizationMatch:
    m: int
    orientation: str
    target: Tuple[float, float]
    distance: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target"] = list(self.target)
        return d


def classify_quantization(sigma1: float, sigma2: float, m_max: int = M_MAX) -> QuantizationMatch:
    """Nearest point of the quantization set with ``m <= m_max``.

    Ties go to the smaller ``m``, then to orientation ``A``.
    """
    if sigma1 < 0 or sigma2 < 0:
        raise ValueError(f"masses must be non-negative, got ({sigma1}, {sigma2})")
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    best = None
    for m in range(m_max + 1):
        for o in ORIENTATIONS:
            t = quantization_target(m, o)
            dist = float(np.hypot(sigma1 - t[0], sigma2 - t[1]))
            if best is None or dist < best.distance:
                best = QuantizationMatch(m, o, t, dist)
    return best


def pohozaev_consistency(sigma1: float, sigma2: float) -> float:
    """``|4 (s1 + s2) - (s1 - s2)^2|``."""
    if sigma1 < 0 or sigma2 < 0:
        raise ValueError(f"masses must be non-negative, got ({sigma1}, {sigma2})")
    return abs(4.0 * (sigma1 + sigma2) - (sigma1 - sigma2) ** 2)


# Pohozaev report -------------------------------------------------------------


@dataclass(frozen=True)
class PohozaevReport:
    center: Tuple[float, float]
    r: float
    sigma1: float
    sigma2: float
    lhs_interior: float
    rhs_interior: float
    boundary_nonlinear: float
    boundary_gradient: float
    grad_h_term: float
    residual_identity: float
    residual_boundary_form: float
    decay: DecayClass
    valid: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = list(self.center)
        d["decay"] = self.decay.to_dict()
        return d


def _gradient_fields(f: Field):
    (gx0, gx), (gy0, gy) = operators.gradient_xy(f.grid, f.center, f.values)
    return Field(f.grid, gx0, gx, "du/dx"), Field(f.grid, gy0, gy, "du/dy")


def pohozaev_report(
    field: Field,
    pair: CoefficientPair,
    center: Sequence[float],
    r: float,
    threshold_N: float = THRESHOLD_N,
    local_size: Tuple[int, int] = LOCAL_PATCH,
) -> PohozaevReport:
    """Both sides of the Pohozaev identity on ``B_r(center)``.

    With ``F = h1 e^u + h2 e^{-u}`` and ``y = x - center``::

        int (2F + y.grad_x F) = r oint F + r oint (u_nu^2 - |grad u|^2 / 2)

    The left side is ``4 (s1 + s2) + grad_h_term`` in the units above.  The
    residual of the reduced identity is trustworthy only when both active
    components decay fast on the circle; ``valid`` records that.
    """
    center = _pt(center)
    probe = CircleProbe(center, float(r), _n_circle_samples(field, center, r))
    probe.check_inside(field.grid.radius)
    prof = mass_profile(field, pair, center, [r], local_size=local_size)
    s1, s2 = float(prof.sigma1[0]), float(prof.sigma2[0])
    lhs = 4.0 * (s1 + s2)
    rhs = (s1 - s2) ** 2

    px, py = probe.points()
    u = field.sample(px, py, method="cubic")
    nl = pair.h1(px, py) * np.exp(u)
    if not pair.one_signed:
        nl = nl + pair.h2(px, py) * np.exp(-u)
    ds = 2 * np.pi * r / probe.n_samples
    boundary_nonlinear = float(r * np.sum(nl) * ds / np.pi)

    fx, fy = _gradient_fields(field)
    gx = fx.sample(px, py, method="cubic")
    gy = fy.sample(px, py, method="cubic")
    nx, ny = (px - center[0]) / r, (py - center[1]) / r
    un = gx * nx + gy * ny
    boundary_gradient = float(r * np.sum(un**2 - 0.5 * (gx**2 + gy**2)) * ds / np.pi)

    def ygradh(x, y):
        uu = field.sample(x, y, method="cubic")
        hx, hy = pair.h1.grad(x, y)
        out = ((x - center[0]) * hx + (y - center[1]) * hy) * np.exp(uu)
        if not pair.one_signed:
            hx, hy = pair.h2.grad(x, y)
            out = out + ((x - center[0]) * hx + (y - center[1]) * hy) * np.exp(-uu)
        return out

    grad_h_term = area_integral(field.grid, ygradh, (center, r), local_size) / np.pi
    dc = decay_class(field, center, r, threshold_N)
    return PohozaevReport(
        center=center,
        r=float(r),
        sigma1=s1,
        sigma2=s2,
        lhs_interior=lhs,
        rhs_interior=rhs,
        boundary_nonlinear=boundary_nonlinear,
        boundary_gradient=boundary_gradient,
        grad_h_term=float(grad_h_term),
        residual_identity=abs(lhs - rhs),
        residual_boundary_form=abs(lhs + grad_h_term - boundary_nonlinear - boundary_gradient),
        decay=dc,
        valid=_active_both_fast(dc, pair),
    )


def sweep_csv(rows: Iterable[Tuple[float, float, float]], m_max: int = M_MAX) -> str:
    """CSV table ``sigma1, sigma2, residual, m, orientation, distance``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma1", "sigma2", "residual", "m", "orientation", "distance"])
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    for s1, s2, res in rows:
        q = classify_quantization(max(s1, 0.0), max(s2, 0.0), m_max)
        w.writerow([fmt(s1), fmt(s2), fmt(res), q.m, q.orientation, fmt(q.distance)])
    return buf.getvalue()


# Green function --------------------------------------------------------------


def _as_pts(p):
    a = np.asarray(p, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError("points must have a trailing axis of length 2")
    return a[..., 0], a[..., 1]


def green_regular_part(x, eta, R: float = 1.0):
    """``H(x, eta) = (1/2pi) log sqrt(R^2 - 2 x.eta + |x|^2 |eta|^2 / R^2)``.

    Equal to ``(1/2pi) log(|x|/R |R^2 x/|x|^2 - eta|)`` away from ``x = 0``,
    and smooth (harmonic in each argument) on the open disk.
    """
    x1, x2 = _as_pts(x)
    e1, e2 = _as_pts(eta)
    q = R * R - 2 * (x1 * e1 + x2 * e2) + (x1 * x1 + x2 * x2) * (e1 * e1 + e2 * e2) / (R * R)
    return np.log(q) / (4 * np.pi)


def green_function(x, eta, R: float = 1.0):
    """Dirichlet Green function of ``-Lap`` on ``B_R(0)``."""
    x1, x2 = _as_pts(x)
    e1, e2 = _as_pts(eta)
    if np.any(np.hypot(x1, x2) > R * (1 + 1e-12)) or np.any(np.hypot(e1, e2) > R * (1 + 1e-12)):
        raise ValueError(f"points must lie in the closed disk of radius {R}")
    d = np.hypot(x1 - e1, x2 - e2)
    if np.any(d == 0):
        raise ValueError("green_function is singular at coincident points")
    return -np.log(d) / (2 * np.pi) + green_regular_part(x, eta, R)


@dataclass
class GreenCheckReport:
    max_residual: float
    probes: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def green_representation_check(
    field: Field,
    pair: CoefficientPair,
    n_probes: int = 20,
    seed: int = 0,
) -> GreenCheckReport:
    """Rebuild ``u`` at random nodes from ``int G f + P[u|boundary]`` with
    ``f = h1 e^u - h2 e^{-u}`` and compare.

    The log singularity is tamed by integrating ``G (f - f(y))`` and adding
    ``f(y) (R^2 - |y|^2) / 4``, the exact integral of ``G(y, .)``.
    """
    g = field.grid
    R = g.radius
    x, y = node_coords(g)
    u = field.flat
    f = pair.h1(x, y) * np.exp(u)
    if not pair.one_signed:
        f = f - pair.h2(x, y) * np.exp(-u)
    f = np.broadcast_to(f, x.shape)
    w = np.concatenate([[0.0], np.repeat(g.ring_weights, g.n_theta)])
    interior = np.arange(0, 1 + (g.n_r - 1) * g.n_theta)
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(interior, size=min(n_probes, interior.size), replace=False))
    bx = R * np.cos(g.thetas)
    by = R * np.sin(g.thetas)
    gb = field.values[-1]
    rep = GreenCheckReport(0.0)
    eta = np.stack([x, y], axis=-1)
    for k in picks:
        yk = np.array([x[k], y[k]])
        mask = np.arange(x.size) != k
        G = np.zeros(x.size)
        G[mask] = green_function(np.broadcast_to(yk, (int(mask.sum()), 2)), eta[mask], R)
        # boundary nodes have G = 0 up to rounding
        vol = float(np.sum(w * G * (f - f[k]))) + f[k] * (R * R - yk @ yk) / 4
        poisson = float(np.mean(gb * (R * R - yk @ yk) / ((bx - yk[0]) ** 2 + (by - yk[1]) ** 2)))
        recon = vol + poisson
        err = abs(recon - u[k])
        rep.probes.append({"x": float(yk[0]), "y": float(yk[1]), "u": float(u[k]), "reconstructed": recon, "error": err})
        rep.max_residual = max(rep.max_residual, err)
    return rep


__all__ = [
    "M_MAX", "quantization_target", "QuantizationMatch", "classify_quantization", "pohozaev_consistency",
    "PohozaevReport", "pohozaev_report", "sweep_csv", "green_function", "green_regular_part",
    "GreenCheckReport", "green_representation_check",
]
