"""Sampled fields, coefficient pairs and the sinh-Gordon residual."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import operators
from .grid import DEFAULT_GRADING, DiskGrid, GridError, Sampler, build_grid

EXP_LIMIT = 700.0
SNAPSHOT_MAGIC = b"SGFLD1"
_HEADER = struct.Struct("<6sIIdd")


class FieldError(ValueError):
    pass


class CoefficientError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


def _lagrange(x, nodes):
    """Lagrange basis values at ``x`` (shape (m,)) for nodes (shape (k,) or (m, k))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)[..., None]
    if nodes.ndim == 1:
        nodes = np.broadcast_to(nodes, x.shape[:-1] + nodes.shape)
    k = nodes.shape[-1]
    out = np.ones(nodes.shape)
    for a in range(k):
        for b in range(k):
            if a != b:
                out[..., a] *= (x[..., 0] - nodes[..., b]) / (nodes[..., a] - nodes[..., b])
    return out


@dataclass(frozen=True, eq=False)
class Field:
    """Scalar samples on a disk grid: one center value plus ``(n_r, n_theta)`` rings."""

    grid: DiskGrid
    center: float
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_r, self.grid.n_theta):
            raise FieldError(f"values shape {vals.shape} does not match grid {(self.grid.n_r, self.grid.n_theta)}")
        c = float(self.center)
        if not np.isfinite(c):
            raise FieldError("non-finite center value")
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            i, j = bad[0]
            raise FieldError(f"non-finite value at ring {i + 1}, angle index {j}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "center", c)

    @classmethod
    def from_function(cls, grid: DiskGrid, f: Sampler, label: str = "") -> "Field":
        x, y = grid.node_xy()
        c = float(np.asarray(f(np.zeros(1), np.zeros(1))).reshape(-1)[0])
        return cls(grid, c, np.asarray(f(x, y), dtype=float), label)

    @classmethod
    def from_flat(cls, grid: DiskGrid, vec: np.ndarray, label: str = "") -> "Field":
        c, v = operators.unflatten(grid, np.asarray(vec, dtype=float))
        return cls(grid, c, v, label)

    @property
    def flat(self) -> np.ndarray:
        return operators.flatten(self.center, self.values)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.center, -self.values, self.label)

    def with_label(self, label: str) -> "Field":
        return Field(self.grid, self.center, self.values, label)

    def max_abs(self) -> float:
        return float(max(abs(self.center), np.abs(self.values).max()))

    def sample(self, x, y, method: str = "linear") -> np.ndarray:
        """Interpolate at points ``(x, y)``.

        ``linear`` is bilinear in ``(r, theta)`` with periodic wrap; ``cubic``
        is tensor four-point Lagrange in ``(s, theta)`` through the pole.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        x, y = np.broadcast_to(x, shape).ravel(), np.broadcast_to(y, shape).ravel()
        g = self.grid
        r = np.hypot(x, y)
        if r.size and r.max() > g.radius * (1 + 1e-12):
            raise GridError(f"point at radius {r.max():.6g} outside grid support {g.radius}")
        r = np.minimum(r, g.radius)
        theta = np.mod(np.arctan2(y, x), 2 * np.pi)
        vec = self.flat
        tf = theta / g.dtheta
        j0 = np.floor(tf).astype(int)
        if method == "linear":
            nodes = np.concatenate([[0.0], g.radial_nodes])
            i0 = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, g.n_r - 1)
            t = (r - nodes[i0]) / (nodes[i0 + 1] - nodes[i0])
            a = tf - j0
            out = np.zeros_like(r)
            for di, wi in ((0, 1 - t), (1, t)):
                for dj, wj in ((0, 1 - a), (1, a)):
                    out += wi * wj * vec[operators.node_index(g, i0 + di, j0 + dj)]
        elif method == "cubic":
            sf = g.s_of_r(r) * g.n_r
            i0 = np.minimum(np.floor(sf).astype(int), g.n_r - 1)
            start = np.minimum(i0 - 1, g.n_r - 3)
            rows = start[:, None] + np.arange(4)[None, :]
            wr = _lagrange(sf, rows)
            cols = j0[:, None] - 1 + np.arange(4)[None, :]
            wt = _lagrange(tf, cols)
            out = np.zeros_like(r)
            for p in range(4):
                for q in range(4):
                    out += wr[:, p] * wt[:, q] * vec[operators.node_index(g, rows[:, p], cols[:, q])]
        else:
            raise ValueError(f"unknown interpolation method {method!r}")
        return out.reshape(shape)

    def to_json_dict(self) -> dict:
        return {
            "format": "SGFLD1-json",
            "n_r": self.grid.n_r,
            "n_theta": self.grid.n_theta,
            "radius": self.grid.radius,
            "grading": self.grid.grading,
            "center": self.center,
            "values": self.values.tolist(),
            "label": self.label,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Field":
        grid = build_grid(d["n_r"], d["n_theta"], d["radius"], d.get("grading", DEFAULT_GRADING))
        return cls(grid, d["center"], np.array(d["values"], dtype=float), d.get("label", ""))


def write_snapshot(field: Field, path: Union[str, Path]) -> None:
    g = field.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, g.n_r, g.n_theta, g.radius, field.center)
    Path(path).write_bytes(header + np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path: Union[str, Path], grading: float = DEFAULT_GRADING) -> Field:
    """Read a binary snapshot; the grid is rebuilt with ``grading``."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError(f"truncated snapshot: expected at least {_HEADER.size} header bytes, got {len(data)}")
    magic, n_r, n_theta, radius, center = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {SNAPSHOT_MAGIC!r}")
    if n_r < 8 or n_theta < 8 or n_theta % 2 or not (radius > 0):
        raise SnapshotError(f"invalid header: n_r={n_r}, n_theta={n_theta}, radius={radius}")
    expected = _HEADER.size + 8 * n_r * n_theta
    if len(data) != expected:
        raise SnapshotError(f"snapshot size mismatch: expected {expected} bytes, got {len(data)}")
    vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n_r, n_theta)
    return Field(build_grid(n_r, n_theta, radius, grading), center, vals.astype(float), Path(path).stem)


# coefficients -----------------------------------------------------------------


@dataclass(frozen=True)
class Coefficient:
    """A named positive sampler parsed from a preset string."""

    spec: str
    func: Callable = field(repr=False, compare=False)
    grad_func: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __call__(self, x, y):
        return self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def grad(self, x, y):
        if self.grad_func is None:
            return sampler_gradient(self.func, x, y)
        return self.grad_func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def preset(spec: str) -> Coefficient:
    """Parse ``const:c``, ``linear:a,b`` (``a + b*x``) or ``gauss:amp,cx,cy,w``
    (``1 + amp*exp(-|x - c|^2 / (2 w^2))``)."""
    kind, _, rest = spec.partition(":")
    try:
        args = [float(t) for t in rest.split(",")] if rest else []
    except ValueError as exc:
        raise CoefficientError(f"bad coefficient preset {spec!r}: {exc}") from None
    if kind == "const" and len(args) == 1:
        c = args[0]
        return Coefficient(spec, lambda x, y: np.full(np.broadcast(x, y).shape, c), lambda x, y: (0 * x, 0 * y))
    if kind == "linear" and len(args) == 2:
        a, b = args
        return Coefficient(
            spec,
            lambda x, y: a + b * x + 0 * y,
            lambda x, y: (np.full(np.broadcast(x, y).shape, b), np.zeros(np.broadcast(x, y).shape)),
        )
    if kind == "gauss" and len(args) == 4:
        amp, cx, cy, w = args
        if not w > 0:
            raise CoefficientError(f"gauss width must be positive in {spec!r}")

        def g(x, y):
            return 1.0 + amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * w * w))

        def dg(x, y):
            e = amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * w * w))
            return -(x - cx) / (w * w) * e, -(y - cy) / (w * w) * e

        return Coefficient(spec, g, dg)
    raise CoefficientError(f"unknown coefficient preset {spec!r}")


def as_coefficient(h) -> Coefficient:
    if isinstance(h, Coefficient):
        return h
    if isinstance(h, str):
        return preset(h)
    if isinstance(h, (int, float)):
        return preset(f"const:{float(h)!r}")
    return Coefficient(getattr(h, "__name__", "callable"), h)


def sampler_gradient(f: Callable, x, y, step: float = 1e-4):
    """Fourth-order central-difference gradient of a sampler."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.array([1.0, -8.0, 8.0, -1.0]) / (12 * step)
    k = np.array([-2, -1, 1, 2]) * step
    gx = sum(wi * np.asarray(f(x + ki, y)) for wi, ki in zip(w, k))
    gy = sum(wi * np.asarray(f(x, y + ki)) for wi, ki in zip(w, k))
    return gx, gy


@dataclass(frozen=True)
class CoefficientPair:
    """Weights ``h1``, ``h2`` of the equation with bound constant ``bound_C``.

    ``one_signed`` drops the ``h2 e^{-u}`` term (Liouville case) while keeping
    ``h2`` a valid positive sampler.
    """

    h1: Coefficient
    h2: Coefficient
    bound_C: float = 2.0
    one_signed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "h1", as_coefficient(self.h1))
        object.__setattr__(self, "h2", as_coefficient(self.h2))
        if not self.bound_C >= 1:
            raise CoefficientError(f"bound_C must be >= 1, got {self.bound_C}")

    def swapped(self) -> "CoefficientPair":
        return CoefficientPair(self.h2, self.h1, self.bound_C, self.one_signed)

    def weight(self, component: int) -> Coefficient:
        return self.h1 if component == 1 else self.h2


@dataclass
class CoefficientReport:
    ok: bool
    h1_min: float
    h1_max: float
    h2_min: float
    h2_max: float
    h1_c1: float
    h2_c1: float
    messages: list


def validate_coefficients(pair: CoefficientPair, grid: DiskGrid) -> CoefficientReport:
    """Sample both weights on every node and check ``1/C <= h <= C``.

    Only C0 bounds and a C1 seminorm proxy are checked; higher smoothness is
    not observable from samples.
    """
    x, y = grid.node_xy()
    x = np.concatenate([[0.0], x.ravel()])
    y = np.concatenate([[0.0], y.ravel()])
    stats, msgs, ok = {}, [], True
    for name, h in (("h1", pair.h1), ("h2", pair.h2)):
        v = np.broadcast_to(np.asarray(h(x, y), dtype=float), x.shape)
        if not np.all(np.isfinite(v)) or v.min() <= 0:
            k = int(np.argmin(np.where(np.isfinite(v), v, -np.inf)))
            raise CoefficientError(f"{name} not positive at ({x[k]:.6g}, {y[k]:.6g}): {v[k]!r}")
        gx, gy = h.grad(x, y)
        stats[name] = (float(v.min()), float(v.max()), float(np.max(np.hypot(gx, gy))))
        lo, hi = 1.0 / pair.bound_C, pair.bound_C
        if v.min() < lo * (1 - 1e-12) or v.max() > hi * (1 + 1e-12):
            ok = False
            msgs.append(f"{name} range [{v.min():.6g}, {v.max():.6g}] outside [{lo:.6g}, {hi:.6g}]")
    return CoefficientReport(ok, *stats["h1"][:2], *stats["h2"][:2], stats["h1"][2], stats["h2"][2], msgs)


# equation --------------------------------------------------------------------


def _checked_exp_arg(field: Field) -> np.ndarray:
    vec = field.flat
    big = np.abs(vec) > EXP_LIMIT
    if big.any():
        k = int(np.argmax(np.abs(vec)))
        where = "center" if k == 0 else f"ring {(k - 1) // field.grid.n_theta + 1}, angle index {(k - 1) % field.grid.n_theta}"
        raise FieldError(f"|u| = {abs(vec[k]):.6g} exceeds {EXP_LIMIT} at {where}")
    return vec


def node_coords(grid: DiskGrid):
    x, y = grid.node_xy()
    return np.concatenate([[0.0], x.ravel()]), np.concatenate([[0.0], y.ravel()])


def pde_residual(field: Field, pair: CoefficientPair, dirichlet=None) -> Field:
    """``Lap u + h1 e^u - h2 e^{-u}`` at every node.

    With ``dirichlet`` (scalar or per-angle array) the boundary ring holds
    ``u - g`` instead of the one-sided PDE residual.
    """
    g = field.grid
    vec = _checked_exp_arg(field)
    x, y = node_coords(g)
    res = operators.apply_laplacian(g, vec) + pair.h1(x, y) * np.exp(vec)
    if not pair.one_signed:
        res = res - pair.h2(x, y) * np.exp(-vec)
    out = Field.from_flat(g, res, "residual")
    if dirichlet is not None:
        vals = np.array(out.values)
        vals[-1] = field.values[-1] - np.broadcast_to(dirichlet, (g.n_theta,))
        out = Field(g, out.center, vals, "residual")
    return out


def swap_symmetry(field: Field, pair: CoefficientPair):
    """``(-u, (h2, h1))``; the residual of the image is minus the original's."""
    return -field, pair.swapped()


def save_json(field: Field, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(field.to_json_dict()), encoding="utf-8")


def load_json(path: Union[str, Path]) -> Field:
    return Field.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
