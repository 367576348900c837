"""Finite-difference operators on a :class:`~sglab.grid.DiskGrid`.

Node ordering for flat vectors: index 0 is the center, ring ``i`` (1-based)
at angle ``j`` is ``1 + (i - 1) * n_theta + j``.  Derivatives in ``s`` are
fourth order: centered five-point stencils that reach across the pole
through the unfolded rings, and six-point one-sided stencils on the last two
rings.  Angular derivatives are periodic sixth-order differences (angular
errors are amplified by ``1/r`` near the pole).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .grid import DiskGrid


def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Weights of the ``deriv``-th derivative at 0 from samples at ``offsets``."""
    t = np.asarray(offsets, dtype=float)
    m = len(t)
    rhs = np.zeros(m)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(np.vander(t, m, increasing=True).T, rhs)


def s_offsets(i: int, n_r: int) -> np.ndarray:
    """Stencil offsets (in ring index) used on ring ``i``."""
    if i + 2 <= n_r:
        return np.arange(-2, 3)
    if i == n_r - 1:
        return np.arange(-4, 2)
    return np.arange(-5, 1)


def node_index(grid: DiskGrid, ring, j):
    """Flat index of unfolded ring ``ring`` (may be <= 0) at angle index ``j``."""
    ring = np.asarray(ring)
    j = np.asarray(j)
    nt = grid.n_theta
    flip = ring < 0
    jj = np.where(flip, (j + nt // 2) % nt, j % nt)
    rr = np.abs(ring)
    return np.where(rr == 0, 0, 1 + (rr - 1) * nt + jj)


def _s_matrix(grid: DiskGrid, deriv: int) -> sp.csr_matrix:
    n, nt = grid.n_r, grid.n_theta
    rows, cols, vals = [], [], []
    j = np.arange(nt)
    for i in range(1, n + 1):
        offs = s_offsets(i, n)
        w = fd_weights(offs, deriv) / grid.ds**deriv
        row = (i - 1) * nt + j
        for k, wk in zip(offs, w):
            rows.append(row)
            cols.append(node_index(grid, np.full(nt, i + k), j))
            vals.append(np.full(nt, wk))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * nt, grid.n_nodes),
    )


_THETA_W1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_THETA_W2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0


def _theta_matrix(grid: DiskGrid, deriv: int) -> sp.csr_matrix:
    n, nt = grid.n_r, grid.n_theta
    w = (_THETA_W1 if deriv == 1 else _THETA_W2) / grid.dtheta**deriv
    j = np.arange(nt)
    ks = [k for k in range(-3, 4) if w[k + 3] != 0.0]
    ring = sp.csr_matrix(
        (
            np.concatenate([np.full(nt, w[k + 3]) for k in ks]),
            (np.tile(j, len(ks)), np.concatenate([(j + k) % nt for k in ks])),
        ),
        shape=(nt, nt),
    )
    block = sp.kron(sp.eye(n, format="csr"), ring, format="csr")
    return sp.hstack([sp.csr_matrix((n * nt, 1)), block], format="csr")


def _center_laplacian_row(grid: DiskGrid) -> sp.csr_matrix:
    # fit ring means ubar(r) = u0 + A r^2 + B r^4 on rings 1 and 2; lap = 4A
    nt = grid.n_theta
    r1, r2 = grid.radial_nodes[:2]
    det = r1**2 * r2**4 - r2**2 * r1**4
    c1 = 4.0 * r2**4 / det
    c2 = -4.0 * r1**4 / det
    row = np.zeros(grid.n_nodes)
    row[0] = -(c1 + c2)
    row[1 : 1 + nt] = c1 / nt
    row[1 + nt : 1 + 2 * nt] = c2 / nt
    return sp.csr_matrix(row)


@lru_cache(maxsize=16)
def _operators(grid: DiskGrid):
    ds1 = _s_matrix(grid, 1)
    ds2 = _s_matrix(grid, 2)
    dt1 = _theta_matrix(grid, 1)
    dt2 = _theta_matrix(grid, 2)
    s = grid.s_nodes[1:]
    r = np.repeat(grid.radial_nodes, grid.n_theta)
    rp = np.repeat(grid.dr_ds(s), grid.n_theta)
    rpp = np.repeat(grid.d2r_ds2(s), grid.n_theta)
    radial = sp.diags(1.0 / rp**2) @ (ds2 - sp.diags(rpp / rp) @ ds1) + sp.diags(1.0 / (r * rp)) @ ds1
    angular = sp.vstack([sp.csr_matrix((1, grid.n_nodes)), sp.diags(1.0 / r**2) @ dt2], format="csr")
    radial = sp.vstack([_center_laplacian_row(grid), radial], format="csr")
    return (radial + angular).tocsr(), ds1, dt1, radial, angular


def laplacian_matrix(grid: DiskGrid) -> sp.csr_matrix:
    """Sparse discrete Laplacian acting on flat node vectors (all rows)."""
    return _operators(grid)[0]


def apply_laplacian(grid: DiskGrid, vec: np.ndarray) -> np.ndarray:
    """``laplacian_matrix(grid) @ vec`` with less rounding.

    Both stencils annihilate constants, so the radial part acts on ``vec``
    minus its center value and the angular part on ring values minus their
    ring mean.  Near the pole the entries reach ``1/(r dtheta)^2`` and the
    direct product would leave O(eps * |u| / (r dtheta)^2) noise.
    """
    _, _, _, radial, angular = _operators(grid)
    vec = np.asarray(vec, dtype=float)
    rings = vec[1:].reshape(grid.n_r, grid.n_theta)
    centered = np.concatenate([[0.0], (rings - rings.mean(axis=1, keepdims=True)).ravel()])
    return radial @ (vec - vec[0]) + angular @ centered


def flatten(center: float, values: np.ndarray) -> np.ndarray:
    return np.concatenate([[center], np.asarray(values, dtype=float).ravel()])


def unflatten(grid: DiskGrid, vec: np.ndarray):
    return float(vec[0]), vec[1:].reshape(grid.n_r, grid.n_theta)


def laplacian(grid: DiskGrid, center: float, values: np.ndarray):
    """Discrete Laplacian as ``(center_value, ring_values)``."""
    return unflatten(grid, apply_laplacian(grid, flatten(center, values)))


def gradient_xy(grid: DiskGrid, center: float, values: np.ndarray):
    """Cartesian gradient ``((gx0, gx), (gy0, gy))`` at all nodes."""
    _, ds1, dt1, _, _ = _operators(grid)
    vec = flatten(center, values)
    nt = grid.n_theta
    s = grid.s_nodes[1:]
    u_r = (ds1 @ vec).reshape(grid.n_r, nt) / grid.dr_ds(s)[:, None]
    u_t = (dt1 @ vec).reshape(grid.n_r, nt) / grid.radial_nodes[:, None]
    c, si = np.cos(grid.thetas)[None, :], np.sin(grid.thetas)[None, :]
    gx = u_r * c - u_t * si
    gy = u_r * si + u_t * c
    # at the pole the radial derivative along each diameter carries the gradient
    w = fd_weights(np.arange(-2, 3), 1) / grid.ds
    j = np.arange(nt)
    d0 = sum(wk * vec[node_index(grid, np.full(nt, k), j)] for k, wk in zip(range(-2, 3), w))
    d0 = d0 / float(grid.dr_ds(0.0))
    gx0 = 2.0 * float(np.mean(d0 * np.cos(grid.thetas)))
    gy0 = 2.0 * float(np.mean(d0 * np.sin(grid.thetas)))
    return (gx0, gx), (gy0, gy)
