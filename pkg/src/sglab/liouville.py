"""Closed-form Liouville bubbles and synthetic multi-bubble fields."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .fields import Field
from .grid import DiskGrid, GridError, build_grid


def bubble_profile(x, y, center=(0.0, 0.0), lam: float = 1.0, h: float = 1.0):
    """``log(8 lam^2 / (h (1 + lam^2 |x - p|^2)^2))``, an entire solution of
    ``Lap v + h e^v = 0`` with total mass ``8 pi``."""
    d2 = (np.asarray(x) - center[0]) ** 2 + (np.asarray(y) - center[1]) ** 2
    return np.log(8.0 * lam * lam / h) - 2.0 * np.log1p(lam * lam * d2)


def bubble_mass(lam: float, r: float) -> float:
    """``(1/2pi) int_{B_r(p)} h e^v`` for the profile above."""
    t = (lam * r) ** 2
    return 4.0 * t / (1.0 + t)


@dataclass(frozen=True)
class BubbleSpec:
    center: Tuple[float, float]
    lam: float
    sign: int = 1
    h_value: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not self.h_value > 0:
            raise ValueError(f"h_value must be positive, got {self.h_value}")
        if np.hypot(*self.center) >= 1.0:
            raise ValueError(f"bubble center {self.center} not inside the unit disk")

    def __call__(self, x, y):
        return self.sign * bubble_profile(x, y, self.center, self.lam, self.h_value)


@dataclass(frozen=True)
class SyntheticFamily:
    bubbles: Tuple[BubbleSpec, ...] = ()
    background: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "bubbles", tuple(self.bubbles))

    def overlaps(self) -> List[Tuple[int, int]]:
        """Index pairs closer than ``10 * max(1/lam)``."""
        if not self.bubbles:
            return []
        min_sep = 10.0 / min(b.lam for b in self.bubbles)
        out = []
        for i, a in enumerate(self.bubbles):
            for j in range(i + 1, len(self.bubbles)):
                b = self.bubbles[j]
                if np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1]) < min_sep:
                    out.append((i, j))
        return out

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(x, y).shape, float(self.background))
        for b in self.bubbles:
            out = out + b(x, y)
        return out


def bubble_field(spec: BubbleSpec, grid: DiskGrid) -> Field:
    if np.hypot(*spec.center) >= grid.radius:
        raise GridError(f"bubble center {spec.center} outside grid")
    return Field.from_function(grid, spec, f"bubble(lam={spec.lam:g}, sign={spec.sign:+d})")


def synth_family(family: SyntheticFamily, grid: DiskGrid) -> Field:
    """Plain superposition of the family's bubbles plus the background.

    Cross terms are ignored, so this is detector input rather than a solution.
    """
    label = f"family({len(family.bubbles)} bubbles)"
    bad = family.overlaps()
    if bad:
        msg = f"bubbles overlap beyond tolerance: {bad}"
        warnings.warn(msg, stacklevel=2)
        label += f" WARNING: {msg}"
    return Field.from_function(grid, family, label)


def dilate(
    field: Field,
    center: Sequence[float],
    eps: float,
    window: float = 1.0,
    size: Optional[Tuple[int, int]] = None,
    method: str = "linear",
) -> Field:
    """``v(y) = u(eps*y + center) + 2 log eps`` on ``B_window(0)``.

    The companion for the other component is ``dilate(-field, ...)``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    g = field.grid
    reach = float(np.hypot(*center)) + eps * window
    if reach > g.radius * (1 + 1e-12):
        raise GridError(f"dilation window reaches radius {reach:.6g} beyond support {g.radius}")
    n_r, n_t = size if size is not None else (g.n_r, g.n_theta)
    out_grid = build_grid(n_r, n_t, window, g.grading)
    shift = 2.0 * np.log(eps)

    def f(y1, y2):
        return field.sample(center[0] + eps * y1, center[1] + eps * y2, method=method) + shift

    return Field.from_function(out_grid, f, f"dilate({field.label})")
