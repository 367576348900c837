"""Polar discretization of a disk and the quadratures built on it.

Radial nodes sit at ``r = R * phi(s)`` for uniform ``s = i / n_r`` with the odd
cubic map ``phi(s) = a*s + (1 - a)*s**3``.  The center ``s = 0`` is stored
separately.  Because ``phi`` is odd, a field sampled on the grid is a smooth
function of ``s`` across the pole once ring ``i`` at angle ``theta + pi`` is
read as the node at ``s = -s_i``; derivative stencils and interpolation use
that unfolding instead of special-casing the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

Sampler = Callable[[np.ndarray, np.ndarray], np.ndarray]

#: spacing at the center relative to a uniform grid (``phi'(0)``)
DEFAULT_GRADING = 0.05
#: node counts used for sub-disk patches
LOCAL_PATCH = (128, 128)

_QUAD_DEGREE = 7


class GridError(ValueError):
    pass


def _phi(s, a):
    return a * s + (1.0 - a) * s**3


def _dphi(s, a):
    return a + 3.0 * (1.0 - a) * s**2


def _d2phi(s, a):
    return 6.0 * (1.0 - a) * s


def _interval_weights(n: int, degree: int = _QUAD_DEGREE) -> np.ndarray:
    """Weights for the integral over [0, n] of a function sampled at 0..n.

    Each unit interval is integrated exactly against the degree-``degree``
    interpolant through the nearest ``degree + 1`` nodes (window shifted
    inward at the ends).
    """
    m = degree + 1
    if n + 1 < m:
        raise GridError(f"need at least {m} radial nodes for the quadrature")
    w = np.zeros(n + 1)
    for k in range(n):
        start = min(max(k - (m - 2) // 2, 0), n + 1 - m)
        t = np.arange(start, start + m, dtype=float) - k
        # moments of the interval [0, 1] against monomials t^p
        moments = 1.0 / np.arange(1, m + 1)
        vander = np.vander(t, m, increasing=True).T
        w[start : start + m] += np.linalg.solve(vander, moments)
    return w


@lru_cache(maxsize=64)
def _radial_weights(n_r: int, grading: float) -> np.ndarray:
    s = np.arange(n_r + 1) / n_r
    c = _interval_weights(n_r) / n_r
    return c * _phi(s, grading) * _dphi(s, grading)


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Tensor polar grid on ``B_radius(0)``.

    ``radial_nodes`` excludes the center.  ``ring_weights[i]`` is the area
    weight of every node on ring ``i``; the center carries zero weight.
    """

    n_r: int
    n_theta: int
    radius: float = 1.0
    grading: float = DEFAULT_GRADING
    radial_nodes: np.ndarray = field(init=False, repr=False)
    thetas: np.ndarray = field(init=False, repr=False)
    ring_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_r < 8 or self.n_theta < 8:
            raise GridError(f"grid too small: n_r={self.n_r}, n_theta={self.n_theta} (need >= 8)")
        if self.n_theta % 2:
            raise GridError(f"n_theta must be even, got {self.n_theta}")
        if not self.radius > 0:
            raise GridError(f"radius must be positive, got {self.radius}")
        if not 0 < self.grading <= 1:
            raise GridError(f"grading must lie in (0, 1], got {self.grading}")
        s = self.s_nodes[1:]
        object.__setattr__(self, "radial_nodes", self.radius * _phi(s, self.grading))
        object.__setattr__(self, "thetas", 2 * np.pi * np.arange(self.n_theta) / self.n_theta)
        w = self.radius**2 * _radial_weights(self.n_r, self.grading)[1:] * (2 * np.pi / self.n_theta)
        object.__setattr__(self, "ring_weights", w)
        for arr in (self.radial_nodes, self.thetas, self.ring_weights):
            arr.flags.writeable = False

    @property
    def key(self) -> Tuple[int, int, float, float]:
        return (self.n_r, self.n_theta, float(self.radius), float(self.grading))

    def __eq__(self, other):
        return isinstance(other, DiskGrid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def s_nodes(self) -> np.ndarray:
        return np.arange(self.n_r + 1) / self.n_r

    @property
    def ds(self) -> float:
        return 1.0 / self.n_r

    @property
    def dtheta(self) -> float:
        return 2 * np.pi / self.n_theta

    @property
    def n_nodes(self) -> int:
        return 1 + self.n_r * self.n_theta

    @property
    def quad_weights(self) -> np.ndarray:
        """Per-node area weights, shape ``(n_r, n_theta)``."""
        return np.broadcast_to(self.ring_weights[:, None], (self.n_r, self.n_theta))

    def dr_ds(self, s):
        return self.radius * _dphi(np.asarray(s, dtype=float), self.grading)

    def d2r_ds2(self, s):
        return self.radius * _d2phi(np.asarray(s, dtype=float), self.grading)

    def r_of_s(self, s):
        return self.radius * _phi(np.asarray(s, dtype=float), self.grading)

    def s_of_r(self, r) -> np.ndarray:
        """Invert the radial map (monotone cubic) by Newton iteration."""
        rho = np.asarray(r, dtype=float) / self.radius
        a = self.grading
        rho = np.maximum(rho, 0.0)
        # upper bounds of the root; Newton on a convex increasing map then
        # decreases monotonically onto it
        s = rho / a
        if a < 1:
            s = np.minimum(s, np.cbrt(rho / (1.0 - a)))
        for _ in range(60):
            step = (_phi(s, a) - rho) / _dphi(s, a)
            s = s - step
            if np.all(np.abs(step) < 1e-15):
                break
        return s

    def cell_size(self, r: float) -> float:
        """Largest local node spacing (radial or arc) at radius ``r``."""
        s = float(self.s_of_r(r))
        return max(float(self.dr_ds(s)) * self.ds, r * self.dtheta)

    def node_xy(self) -> Tuple[np.ndarray, np.ndarray]:
        r = self.radial_nodes[:, None]
        return r * np.cos(self.thetas)[None, :], r * np.sin(self.thetas)[None, :]


def build_grid(n_r: int, n_theta: int, radius: float = 1.0, grading: float = DEFAULT_GRADING) -> DiskGrid:
    return DiskGrid(int(n_r), int(n_theta), float(radius), float(grading))


@dataclass(frozen=True)
class CircleProbe:
    center: Tuple[float, float]
    r: float
    n_samples: int = 256

    def __post_init__(self):
        if not self.r > 0:
            raise GridError(f"probe radius must be positive, got {self.r}")
        if self.n_samples < 1:
            raise GridError("n_samples must be positive")

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        t = 2 * np.pi * np.arange(self.n_samples) / self.n_samples
        return self.center[0] + self.r * np.cos(t), self.center[1] + self.r * np.sin(t)

    def check_inside(self, radius: float, tol: float = 1e-12) -> None:
        reach = float(np.hypot(*self.center)) + self.r
        if reach > radius * (1 + tol):
            raise GridError(
                f"circle of radius {self.r} at {tuple(self.center)} leaves the disk of radius {radius}"
            )


def area_integral(
    grid: DiskGrid,
    f: Sampler,
    region: Optional[Tuple[Tuple[float, float], float]] = None,
    local_size: Tuple[int, int] = LOCAL_PATCH,
) -> float:
    """Integrate the sampler ``f(x, y)`` over the grid disk or a sub-disk.

    ``region = (center, r)`` resamples ``f`` on a fresh polar patch of
    ``B_r(center)`` instead of masking the global nodes.
    """
    if region is None:
        x, y = grid.node_xy()
        vals = np.asarray(f(x, y), dtype=float)
        return float(np.sum(grid.ring_weights * vals.sum(axis=1)))
    center, r = region
    CircleProbe(tuple(center), float(r), 1).check_inside(grid.radius)
    patch = build_grid(local_size[0], local_size[1], float(r), grid.grading)
    x, y = patch.node_xy()
    vals = np.asarray(f(x + center[0], y + center[1]), dtype=float)
    return float(np.sum(patch.ring_weights * vals.sum(axis=1)))


def circle_average(field, probe: CircleProbe, method: str = "linear") -> float:
    """Mean of ``field`` over ``probe``'s circle (equispaced samples)."""
    probe.check_inside(field.grid.radius)
    return float(np.mean(field.sample(*probe.points(), method=method)))


def circle_oscillation(field, probe: CircleProbe, method: str = "linear") -> float:
    probe.check_inside(field.grid.radius)
    vals = field.sample(*probe.points(), method=method)
    return float(vals.max() - vals.min())


def annulus_integral(
    f: Sampler,
    center: Tuple[float, float],
    r_in: float,
    r_out: float,
    size: Tuple[int, int] = (48, LOCAL_PATCH[1]),
) -> float:
    """Integral of ``f`` over ``r_in < |x - center| < r_out``.

    Gauss-Legendre in ``r`` times the trapezoid rule in ``theta``; all weights
    are positive, so positive integrands give non-negative increments.
    """
    if not 0 <= r_in <= r_out:
        raise GridError(f"bad annulus ({r_in}, {r_out})")
    if r_out == r_in:
        return 0.0
    t, w = np.polynomial.legendre.leggauss(size[0])
    r = 0.5 * (r_out - r_in) * t + 0.5 * (r_out + r_in)
    w = 0.5 * (r_out - r_in) * w * r * (2 * np.pi / size[1])
    th = 2 * np.pi * np.arange(size[1]) / size[1]
    x = center[0] + r[:, None] * np.cos(th)[None, :]
    y = center[1] + r[:, None] * np.sin(th)[None, :]
    vals = np.asarray(f(x, y), dtype=float)
    return float(np.sum(w * vals.sum(axis=1)))
