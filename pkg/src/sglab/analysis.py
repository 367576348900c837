"""Bubble detection and local mass analysis of a single field.

Components are numbered as in the equation: component 1 is ``u`` with
weight ``h1 e^u``, component 2 is ``-u`` with weight ``h2 e^{-u}``.  In
one-signed mode component 2 is inactive: its mass is zero and it counts as
fast-decaying wherever a decision depends on it.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares, minimize

from . import operators
from .fields import EXP_LIMIT, CoefficientPair, Field, FieldError, node_coords
from .grid import LOCAL_PATCH, CircleProbe, GridError, annulus_integral, area_integral

log = logging.getLogger(__name__)

FAST, SLOW = "fast", "slow"

C1_THRESHOLD = 3.0
THRESHOLD_N = 5.0
RATIO_TAU = 3.0
GAP_FACTOR = 10.0
L_FACTOR = 10.0
OSCILLATION_ANOMALY = 10.0

Point = Tuple[float, float]


def _pt(p) -> Point:
    return (float(p[0]), float(p[1]))


def _n_circle_samples(field: Field, center: Point, r: float) -> int:
    h = field.grid.cell_size(min(np.hypot(*center), field.grid.radius))
    return int(np.clip(np.ceil(8 * np.pi * r / h), 256, 4096))


def _component_sampler(field: Field, pair: CoefficientPair, component: int, method: str):
    h = pair.weight(component)
    sgn = 1.0 if component == 1 else -1.0

    def f(x, y):
        u = sgn * field.sample(x, y, method=method)
        if np.max(u, initial=-np.inf) > EXP_LIMIT:
            raise FieldError(f"exponent {np.max(u):.6g} exceeds {EXP_LIMIT}")
        return h(x, y) * np.exp(u)

    return f


# masses ----------------------------------------------------------------------


@dataclass(frozen=True)
class MassProfile:
    radii: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    center: Point

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "sigma1", "sigma2"])
        for row in zip(self.radii, self.sigma1, self.sigma2):
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "radii": self.radii.tolist(),
            "sigma1": self.sigma1.tolist(),
            "sigma2": self.sigma2.tolist(),
        }


def mass_profile(
    field: Field,
    pair: CoefficientPair,
    center: Sequence[float],
    radii: Sequence[float],
    method: str = "cubic",
    local_size: Tuple[int, int] = LOCAL_PATCH,
) -> MassProfile:
    """``sigma_i(r) = (1/2pi) int_{B_r(center)} h_i e^{+-u}`` at each radius.

    Samples use the cubic interpolant by default: bilinear resampling of a
    bubble narrower than a few cells loses several percent of its mass.
    The innermost disk uses a graded polar patch; each further radius adds
    the positive-weight quadrature of one annulus, so the profile cannot
    decrease.
    """
    center = _pt(center)
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0:
        raise ValueError("radii must be non-empty")
    if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    CircleProbe(center, float(radii[-1]), 1).check_inside(field.grid.radius)
    comps = (1,) if pair.one_signed else (1, 2)
    out = {1: np.zeros(radii.size), 2: np.zeros(radii.size)}
    for c in comps:
        f = _component_sampler(field, pair, c, method)
        acc = area_integral(field.grid, f, (center, radii[0]), local_size) / (2 * np.pi)
        vals = [acc]
        for a, b in zip(radii[:-1], radii[1:]):
            acc += max(annulus_integral(f, center, a, b), 0.0) / (2 * np.pi)
            vals.append(acc)
        out[c] = np.array(vals)
    return MassProfile(radii, out[1], out[2], center)


def disk_masses(field: Field, pair: CoefficientPair, center, r: float, **kw) -> Tuple[float, float]:
    p = mass_profile(field, pair, center, [r], **kw)
    return float(p.sigma1[0]), float(p.sigma2[0])


def average_slope(field: Field, r: float, center: Sequence[float] = (0.0, 0.0), method: str = "cubic") -> float:
    """``d/dr`` of the circle average of ``u`` about ``center``.

    About the origin the exact ring means are differentiated with a six-point
    stencil in ``s`` (even reflection through the pole); elsewhere circle
    averages are differenced.
    """
    g = field.grid
    center = _pt(center)
    if center == (0.0, 0.0):
        means = np.concatenate([[field.center], field.values.mean(axis=1)])
        sf = float(g.s_of_r(r)) * g.n_r
        i0 = int(np.clip(np.floor(sf) - 2, -(g.n_r - 1), g.n_r - 5))
        idx = np.arange(i0, i0 + 6)
        w = operators.fd_weights(idx - sf, 1) * g.n_r
        return float(w @ means[np.abs(idx)] / g.dr_ds(sf / g.n_r))
    h = 1e-4 * max(r, 1e-3)
    n = _n_circle_samples(field, center, r)

    def avg(rho):
        return float(np.mean(field.sample(*CircleProbe(center, rho, n).points(), method=method)))

    return (avg(r - 2 * h) - 8 * avg(r - h) + 8 * avg(r + h) - avg(r + 2 * h)) / (12 * h)


# decay -----------------------------------------------------------------------


@dataclass(frozen=True)
class DecayClass:
    """Fast/slow label of ``u`` and ``-u`` on one circle.

    ``u_value`` is ``max (u + 2 log|x - center|)`` over the circle.
    """

    u: str
    minus_u: str
    u_value: float
    minus_u_value: float
    threshold_N: float

    @property
    def both_fast(self) -> bool:
        return self.u == FAST and self.minus_u == FAST

    def to_dict(self) -> dict:
        return asdict(self)


def decay_class(
    field: Field,
    center: Sequence[float],
    r: float,
    threshold_N: float = THRESHOLD_N,
    n_samples: Optional[int] = None,
) -> DecayClass:
    center = _pt(center)
    probe = CircleProbe(center, float(r), n_samples or _n_circle_samples(field, center, r))
    probe.check_inside(field.grid.radius)
    vals = field.sample(*probe.points())
    a = float(vals.max() + 2 * np.log(r))
    b = float((-vals).max() + 2 * np.log(r))
    label = lambda v: FAST if v <= -threshold_N else SLOW  # noqa: E731
    return DecayClass(label(a), label(b), a, b, float(threshold_N))


def _active_both_fast(dc: DecayClass, pair: CoefficientPair) -> bool:
    return dc.u == FAST and (pair.one_signed or dc.minus_u == FAST)


# selection -------------------------------------------------------------------


@dataclass(frozen=True)
class BubbleDisk:
    center: Point
    l: float
    sign: int
    peak: float
    eps: float
    fit_quality: float = float("nan")
    fit_lambda: float = float("nan")
    fit_h: float = float("nan")
    fit_center: Optional[Point] = None
    decay_bound: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = list(self.center)
        d["fit_center"] = None if self.fit_center is None else list(self.fit_center)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BubbleDisk":
        d = dict(d)
        d["center"] = _pt(d["center"])
        if d.get("fit_center") is not None:
            d["fit_center"] = _pt(d["fit_center"])
        return cls(**d)


class Selection(list):
    """The disks found by :func:`select_bubbles`, with how the search ended.

    ``overflow`` is set when ``max_bubbles`` disks were found and the
    decay bound still failed somewhere.
    """

    def __init__(self, disks=(), overflow: bool = False, stop_reason: str = "", rejected: int = 0):
        super().__init__(disks)
        self.overflow = overflow
        self.stop_reason = stop_reason
        self.rejected = rejected


def _argmax_lex(vals: np.ndarray, x: np.ndarray, y: np.ndarray) -> int:
    best = np.flatnonzero(vals == vals.max())
    if best.size == 1:
        return int(best[0])
    order = np.lexsort((y[best], x[best]))
    return int(best[order[0]])


def _dist_to_set(x, y, pts: List[Point]) -> np.ndarray:
    d = np.full(np.shape(x), np.inf)
    for px, py in pts:
        d = np.minimum(d, np.hypot(x - px, y - py))
    return d


def _disk_radius(field: Field, w_sampler, xj: Point, eps: float, rho_max: float, c1: float) -> float:
    """Largest ``rho <= rho_max`` with ``max_{|x - xj| = rho} w + 2 log rho <= c1``.

    Geometric scan down from ``rho_max``, then 40 bisections; ``eps`` is
    returned when no radius above it qualifies.
    """

    def ok(rho):
        n = _n_circle_samples(field, xj, rho)
        return float(np.max(w_sampler(*CircleProbe(xj, rho, n).points()))) + 2 * np.log(rho) <= c1

    if rho_max <= eps:
        return rho_max
    if ok(rho_max):
        return rho_max
    hi = rho_max
    lo = None
    while hi > eps:
        rho = max(hi / 1.25, eps)
        if ok(rho):
            lo = rho
            break
        hi = rho
    if lo is None:
        return eps
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _refine_peak(field: Field, sign: int, xj: Point, peak: float, cell: float) -> Tuple[Point, float]:
    """Maximize the cubic interpolant of ``sign * u`` within one cell of the
    peak node; a node can sit half a bubble width off the true maximum."""
    R = field.grid.radius

    def neg(p):
        if np.hypot(p[0] - xj[0], p[1] - xj[1]) > cell or np.hypot(*p) >= R:
            return -peak
        return -sign * float(field.sample(p[0], p[1], method="cubic"))

    start = np.array(xj)
    simplex = np.array([start, start + [0.5 * cell, 0.0], start + [0.0, 0.5 * cell]])
    res = minimize(neg, start, method="Nelder-Mead", options={"initial_simplex": simplex, "xatol": 1e-4 * cell, "fatol": 1e-12})
    if -res.fun > peak:
        return (float(res.x[0]), float(res.x[1])), float(-res.fun)
    return xj, peak


def _fit_profile(field: Field, pair: CoefficientPair, disk: BubbleDisk) -> BubbleDisk:
    """Least-squares match of the dilated field to a Liouville profile.

    Fitted on node values within ``max(5 eps, 4 cells)`` of the center with
    free ``(log lam, shift, log h)``; ``fit_quality`` is the RMS misfit over
    the range of the dilated data.
    """
    g = field.grid
    x, y = node_coords(g)
    u = field.flat * disk.sign
    eps = disk.eps
    cell = g.cell_size(min(np.hypot(*disk.center), g.radius))
    win = max(5 * eps, 4 * cell)
    win = min(win, disk.l)
    sel = np.hypot(x - disk.center[0], y - disk.center[1]) <= win
    if sel.sum() < 6:
        return disk
    yx = (x[sel] - disk.center[0]) / eps
    yy = (y[sel] - disk.center[1]) / eps
    v = u[sel] + 2 * np.log(eps)
    h0 = float(np.asarray(pair.weight(1 if disk.sign > 0 else 2)(*disk.center)))

    def model(p):
        lam2 = np.exp(2 * p[0])
        return np.log(8 * lam2) - p[3] - 2 * np.log1p(lam2 * ((yx - p[1]) ** 2 + (yy - p[2]) ** 2))

    p0 = np.array([0.5 * np.log(h0 / 8.0), 0.0, 0.0, np.log(h0)])
    res = least_squares(lambda p: model(p) - v, p0, method="lm", xtol=1e-12, ftol=1e-12)
    span = float(v.max() - v.min())
    rms = float(np.sqrt(np.mean(res.fun**2)))
    quality = rms / span if span > 0 else rms
    c = (disk.center[0] + eps * res.x[1], disk.center[1] + eps * res.x[2])
    return BubbleDisk(
        disk.center, disk.l, disk.sign, disk.peak, disk.eps,
        fit_quality=quality, fit_lambda=float(np.exp(res.x[0])), fit_h=float(np.exp(res.x[3])),
        fit_center=(float(c[0]), float(c[1])), decay_bound=disk.decay_bound,
    )


def select_bubbles(
    field: Field,
    pair: CoefficientPair,
    c1_threshold: float = C1_THRESHOLD,
    max_bubbles: int = 10,
    l_factor: float = L_FACTOR,
    fit: bool = True,
    max_rejections: int = 500,
) -> Selection:
    """Discrete selection process.

    Repeatedly take the node maximizing ``w + 2 log dist(x, S u boundary)``
    with ``w = |u|`` (``u`` in one-signed mode); stop once that value is at
    most ``c1_threshold``.  Otherwise the largest ``w`` of the same sign of
    ``u`` near it, refined between nodes, becomes a new center.  A candidate
    is rejected when it is not an interior local maximum of ``w`` or when its
    disk spans fewer than ``l_factor`` scales ``eps``; the same-sign part of
    ``B_d(q)`` is then excluded and the search goes on, up to
    ``max_rejections`` times.
    """
    if max_bubbles < 1:
        raise ValueError("max_bubbles must be >= 1")
    g = field.grid
    x, y = node_coords(g)
    u = field.flat
    w = u if pair.one_signed else np.abs(u)
    if pair.one_signed:
        w_sampler = field.sample
    else:
        w_sampler = lambda px, py: np.abs(field.sample(px, py))  # noqa: E731
    R = g.radius
    d = R - np.hypot(x, y)
    found: List[BubbleDisk] = []
    centers: List[Point] = []
    overflow, reason, rejected = False, "", 0
    with np.errstate(divide="ignore"):
        F = w + 2 * np.log(d)
    while True:
        q = _argmax_lex(F, x, y)
        if F[q] <= c1_threshold:
            reason = "decay bound holds"
            break
        if len(found) >= max_bubbles:
            overflow, reason = True, "max_bubbles reached"
            break
        if rejected >= max_rejections:
            reason = f"gave up after {rejected} rejected candidates"
            break
        dq = np.hypot(x - x[q], y - y[q])
        idx = np.flatnonzero((dq <= 0.5 * d[q]) & ((u >= 0) == (u[q] >= 0) if not pair.one_signed else True))
        j = int(idx[_argmax_lex(w[idx], x[idx], y[idx])])
        xj = (float(x[j]), float(y[j]))
        peak = float(w[j])
        cell = g.cell_size(min(np.hypot(*xj), R))
        around = np.hypot(x - xj[0], y - xj[1]) <= 2 * cell
        accept = bool(w[around].max() <= peak)
        bound = True
        if accept:
            xj, peak = _refine_peak(field, 1 if (pair.one_signed or u[j] >= 0) else -1, xj, peak, cell)
        eps = float(np.exp(-peak / 2))
        if accept:
            rho_max = 0.9 * (R - np.hypot(*xj))
            if centers:
                rho_max = min(rho_max, 0.5 * float(_dist_to_set(x[j], y[j], centers)))
            l = _disk_radius(field, w_sampler, xj, eps, rho_max, c1_threshold)
            if l < l_factor * eps:
                # a background offset can keep the bound from holding at any
                # radius; a peak that still drops like a Liouville profile
                # over l_factor widths is kept with the geometric radius
                ring = w_sampler(*CircleProbe(xj, rho_max, _n_circle_samples(field, xj, rho_max)).points())
                accept = rho_max >= l_factor * eps and peak - float(np.max(ring)) >= 4 * np.log(l_factor)
                l, bound = rho_max, False
        if not accept:
            rejected += 1
            # a rejected peak of one component says nothing about the other
            same = True if pair.one_signed else (np.sign(u) == (1.0 if u[j] >= 0 else -1.0))
            F[(dq <= d[q]) & same] = -np.inf
            continue
        sign = 1 if (pair.one_signed or u[j] >= 0) else -1
        found.append(BubbleDisk(xj, float(l), sign, peak, eps, decay_bound=bound))
        centers.append(xj)
        d = np.minimum(d, np.hypot(x - xj[0], y - xj[1]))
        with np.errstate(divide="ignore"):
            F = w + 2 * np.log(d)
    # keep the disks pairwise disjoint
    disks = []
    for k, b in enumerate(found):
        others = [c for i, c in enumerate(centers) if i != k]
        l = b.l if not others else min(b.l, 0.5 * float(_dist_to_set(*b.center, others)))
        disks.append(BubbleDisk(b.center, float(l), b.sign, b.peak, b.eps, decay_bound=b.decay_bound))
    if fit:
        disks = [_fit_profile(field, pair, b) for b in disks]
    log.info("selected %d disk(s): %s", len(disks), reason)
    return Selection(disks, overflow, reason, rejected)


# groups ----------------------------------------------------------------------


@dataclass(frozen=True)
class Group:
    members: Tuple[BubbleDisk, ...]
    hull_center: Point
    hull_radius: float
    separation_ratio: float

    def to_dict(self) -> dict:
        return {
            "members": [m.to_dict() for m in self.members],
            "hull_center": list(self.hull_center),
            "hull_radius": self.hull_radius,
            "separation_ratio": self.separation_ratio,
        }


def _make_group(disks: List[BubbleDisk], members: List[int], P: np.ndarray) -> Group:
    pts = P[members]
    c = pts.mean(axis=0)
    others = np.setdiff1d(np.arange(len(P)), members)
    diam = max((np.hypot(*(pts[a] - pts[b])) for a in range(len(pts)) for b in range(a)), default=0.0)
    if others.size:
        gap = float(np.min(np.hypot(*(P[others][:, None, :] - pts[None, :, :]).transpose(2, 0, 1))))
    else:
        gap = np.inf
    sep = gap / diam if diam > 0 else np.inf
    return Group(
        tuple(disks[i] for i in members),
        (float(c[0]), float(c[1])),
        float(np.max(np.hypot(*(pts - c).T))),
        float(sep),
    )


def group_bubbles(disks: Sequence[BubbleDisk], ratio_tau: float = RATIO_TAU, gap_factor: float = GAP_FACTOR) -> List[Group]:
    """Cluster disk centers into groups of mutually comparable spacing.

    Starting from the closest unassigned pair, single linkage at
    ``ratio_tau`` times its distance grows a cluster.  If the nearest
    outside center is closer than ``gap_factor`` times the cluster diameter,
    the scale is raised to absorb it (dissolving any group it belonged to)
    and the cluster regrows.  Isolated disks end up as singleton groups.
    """
    if not ratio_tau > 1 or not gap_factor > 1:
        raise ValueError("ratio_tau and gap_factor must exceed 1")
    order = sorted(range(len(disks)), key=lambda i: (disks[i].center[0], disks[i].center[1]))
    disks = [disks[i] for i in order]
    n = len(disks)
    P = np.array([d.center for d in disks], dtype=float).reshape(n, 2)
    D = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1)) if n else np.zeros((0, 0))
    owner = np.full(n, -1)
    groups: Dict[int, List[int]] = {}
    next_id = 0
    while True:
        free = np.flatnonzero(owner < 0)
        if free.size == 0:
            break
        if free.size == 1:
            groups[next_id] = [int(free[0])]
            owner[free[0]] = next_id
            next_id += 1
            continue
        sub = D[np.ix_(free, free)] + np.diag(np.full(free.size, np.inf))
        a, b = np.unravel_index(np.argmin(sub), sub.shape)
        cluster = {int(free[a]), int(free[b])}
        scale = ratio_tau * float(sub[a, b])
        while True:
            grew = True
            while grew:
                grew = False
                for k in range(n):
                    if k not in cluster and min(D[k, m] for m in cluster) <= scale:
                        if owner[k] >= 0:
                            cluster |= set(groups.pop(int(owner[k])))
                        else:
                            cluster.add(k)
                        grew = True
            members = sorted(cluster)
            outside = [k for k in range(n) if k not in cluster]
            if not outside:
                break
            gap = min(D[k, m] for k in outside for m in members)
            diam = max(D[p, q] for p in members for q in members)
            if gap >= gap_factor * diam:
                break
            scale = max(scale, gap)
        for k in cluster:
            owner[k] = next_id
        groups[next_id] = sorted(cluster)
        next_id += 1
    out = [_make_group(disks, m, P) for m in groups.values()]
    return sorted(out, key=lambda gr: (gr.members[0].center[0], gr.members[0].center[1]))


# ladder ----------------------------------------------------------------------


@dataclass(frozen=True)
class LadderSegment:
    kind: str  # "plateau" or "transition"
    r_start: float
    r_end: float
    sigma1: float
    sigma2: float
    slow: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slow"] = list(self.slow)
        return d


@dataclass(frozen=True)
class LadderReport:
    center: Point
    threshold_N: float
    radii: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    decay: Tuple[DecayClass, ...]
    segments: Tuple[LadderSegment, ...]

    @property
    def ladder(self) -> List[Tuple[float, float]]:
        return [(s.sigma1, s.sigma2) for s in self.segments if s.kind == "plateau"]

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "threshold_N": self.threshold_N,
            "radii": self.radii.tolist(),
            "sigma1": self.sigma1.tolist(),
            "sigma2": self.sigma2.tolist(),
            "decay": [d.to_dict() for d in self.decay],
            "segments": [s.to_dict() for s in self.segments],
            "ladder": [list(p) for p in self.ladder],
        }


def decay_ladder_scan(
    field: Field,
    pair: CoefficientPair,
    center: Sequence[float],
    r_min: float,
    r_max: float,
    threshold_N: float = THRESHOLD_N,
    n_radii: int = 40,
) -> LadderReport:
    """Sweep geometric radii and split them into plateaus (both components
    fast, masses frozen) and transition layers (some component slow).

    Each plateau reports the masses at its outer radius.
    """
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    center = _pt(center)
    radii = np.geomspace(r_min, r_max, n_radii)
    prof = mass_profile(field, pair, center, radii)
    decay = tuple(decay_class(field, center, r, threshold_N) for r in radii)
    segs: List[LadderSegment] = []
    start = 0
    for k in range(1, n_radii + 1):
        state = lambda i: _slow_set(decay[i], pair)  # noqa: E731
        if k < n_radii and state(k) == state(start):
            continue
        slow = state(start)
        segs.append(
            LadderSegment(
                "transition" if slow else "plateau",
                float(radii[start]),
                float(radii[k - 1]),
                float(prof.sigma1[k - 1]),
                float(prof.sigma2[k - 1]),
                slow,
            )
        )
        start = k
    return LadderReport(center, float(threshold_N), radii, prof.sigma1, prof.sigma2, decay, tuple(segs))


def _slow_set(dc: DecayClass, pair: CoefficientPair) -> Tuple[str, ...]:
    out = []
    if dc.u == SLOW:
        out.append("u")
    if dc.minus_u == SLOW and not pair.one_signed:
        out.append("-u")
    return tuple(out)


# oscillation -----------------------------------------------------------------


@dataclass
class OscillationReport:
    probes: List[dict] = field(default_factory=list)
    max_oscillation: float = 0.0
    anomalies: List[int] = field(default_factory=list)
    threshold: float = OSCILLATION_ANOMALY

    def to_dict(self) -> dict:
        return asdict(self)


def oscillation_check(
    field: Field,
    disks: Sequence[BubbleDisk] = (),
    probes: int = 32,
    seed: int = 0,
    anomaly: float = OSCILLATION_ANOMALY,
    n_radial: int = 12,
    n_angular: int = 48,
) -> OscillationReport:
    """Oscillation of ``u`` on balls ``B(x, d(x, centers)/2)`` at random ``x``
    outside all disks; balls are clipped to the domain."""
    g = field.grid
    rng = np.random.default_rng(seed)
    centers = [d.center for d in disks]
    rep = OscillationReport(threshold=anomaly)
    tries = 0
    rr = np.linspace(0, 1, n_radial + 1)[1:]
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    while len(rep.probes) < probes and tries < 1000 * max(probes, 1):
        tries += 1
        px, py = rng.uniform(-g.radius, g.radius, 2)
        if np.hypot(px, py) >= g.radius * 0.98:
            continue
        if any(np.hypot(px - d.center[0], py - d.center[1]) <= d.l for d in disks):
            continue
        rho = min(0.5 * float(_dist_to_set(px, py, centers)), g.radius - np.hypot(px, py))
        if rho <= 0:
            continue
        sx = np.concatenate([[px], (px + rho * rr[:, None] * np.cos(th)).ravel()])
        sy = np.concatenate([[py], (py + rho * rr[:, None] * np.sin(th)).ravel()])
        vals = field.sample(sx, sy)
        osc = float(vals.max() - vals.min())
        rep.probes.append({"x": float(px), "y": float(py), "radius": float(rho), "oscillation": osc})
        if osc > anomaly:
            rep.anomalies.append(len(rep.probes) - 1)
    rep.max_oscillation = max((p["oscillation"] for p in rep.probes), default=0.0)
    return rep


__all__ = [
    "FAST", "SLOW", "MassProfile", "mass_profile", "disk_masses", "average_slope", "DecayClass",
    "decay_class", "BubbleDisk", "Selection", "select_bubbles", "Group", "group_bubbles",
    "LadderSegment", "LadderReport", "decay_ladder_scan", "OscillationReport", "oscillation_check",
    "GridError",
]
