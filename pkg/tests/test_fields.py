import json
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import grid
from sglab import CoefficientPair, Field, pde_residual, preset, swap_symmetry, validate_coefficients
from sglab import operators
from sglab.fields import (
    CoefficientError,
    FieldError,
    SnapshotError,
    load_json,
    read_snapshot,
    save_json,
    write_snapshot,
)
from sglab.liouville import BubbleSpec, bubble_field


def _field(g, f):
    return Field.from_function(g, f)


# coefficients ----------------------------------------------------------------


def test_constant_pair_passes():
    rep = validate_coefficients(CoefficientPair("const:1", "const:1", 2.0), grid(16))
    assert rep.ok and rep.h1_min == rep.h1_max == 1.0 and rep.h2_min == rep.h2_max == 1.0


def test_linear_range():
    rep = validate_coefficients(CoefficientPair("linear:1,0.5", "const:1", 2.0), grid(32))
    assert rep.ok
    assert rep.h1_min == pytest.approx(0.5, abs=1e-12)
    assert rep.h1_max == pytest.approx(1.5, abs=1e-12)
    assert rep.h1_c1 == pytest.approx(0.5, abs=1e-9)


def test_vanishing_weight_is_hard_failure():
    with pytest.raises(CoefficientError, match="not positive"):
        validate_coefficients(CoefficientPair("linear:0,1", "const:1"), grid(16))


def test_bound_violation_reported():
    rep = validate_coefficients(CoefficientPair("const:3", "const:1", 2.0), grid(16))
    assert not rep.ok and "h1" in rep.messages[0]


@pytest.mark.parametrize("spec", ["const:", "poly:1", "linear:1", "gauss:1,0,0,0", "const:x"])
def test_bad_presets(spec):
    with pytest.raises(CoefficientError):
        preset(spec)


def test_bound_constant_at_least_one():
    with pytest.raises(CoefficientError):
        CoefficientPair("const:1", "const:1", 0.5)


def test_gauss_gradient_matches_difference():
    h = preset("gauss:0.5,0.2,-0.1,0.3")
    x, y = np.array([0.1, -0.4]), np.array([0.3, 0.2])
    gx, gy = h.grad(x, y)
    d = 1e-6
    assert gx == pytest.approx((h(x + d, y) - h(x - d, y)) / (2 * d), rel=1e-6)
    assert gy == pytest.approx((h(x, y + d) - h(x, y - d)) / (2 * d), rel=1e-6)


# swap symmetry and residual --------------------------------------------------


def test_swap_of_zero_is_fixed_point():
    g = grid(16)
    u = Field(g, 0.0, np.zeros((16, 16)))
    pair = CoefficientPair("const:1", "const:1")
    v, q = swap_symmetry(u, pair)
    assert v.center == 0 and np.all(v.values == 0)
    assert q.h1.spec == "const:1" and q.h2.spec == "const:1"
    assert np.array_equal(pde_residual(v, q).flat, pde_residual(u, pair).flat)


def test_swap_of_bubble():
    g = grid(32)
    v = bubble_field(BubbleSpec((0.1, 0.0), 10.0, h_value=1.5), g)
    w, q = swap_symmetry(v, CoefficientPair("const:1.5", "const:1"))
    assert np.array_equal(w.flat, -v.flat)
    assert (q.h1.spec, q.h2.spec) == ("const:1", "const:1.5")


smooth_coeffs = st.sampled_from(["const:1", "const:0.7", "linear:1,0.3", "linear:1.2,-0.4", "gauss:0.5,0.1,0.2,0.3"])


@given(
    a=st.lists(st.floats(-2, 2), min_size=6, max_size=6),
    h1=smooth_coeffs,
    h2=smooth_coeffs,
)
def test_residual_antisymmetric_under_swap(a, h1, h2):
    g = grid(32)

    def f(x, y):
        return a[0] + a[1] * x + a[2] * y + a[3] * np.sin(3 * x) * np.cos(2 * y) + a[4] * (x * x - y * y) + a[5] * np.exp(x)

    u = _field(g, f)
    pair = CoefficientPair(h1, h2)
    r = pde_residual(u, pair).flat
    rs = pde_residual(*swap_symmetry(u, pair)).flat
    scale = max(1.0, float(np.abs(r).max()))
    assert np.max(np.abs(rs + r)) <= 1e-12 * scale


def test_zero_is_exact_solution():
    g = grid(32)
    u = Field(g, 0.0, np.zeros((32, 32)))
    assert np.max(np.abs(pde_residual(u, CoefficientPair("const:1", "const:1")).flat)) <= 1e-12


def test_one_signed_bubble_residual_order():
    pair = CoefficientPair("const:1", "const:1", one_signed=True)
    errs = []
    for n in (64, 128, 256):
        r = pde_residual(bubble_field(BubbleSpec((0.0, 0.0), 10.0), grid(n)), pair)
        errs.append(max(abs(r.center), float(np.abs(r.values[:-1]).max())))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8), (errs, orders)


def test_dirichlet_boundary_ring():
    g = grid(16)
    u = Field(g, 0.0, np.full((16, 16), 0.25))
    r = pde_residual(u, CoefficientPair("const:1", "const:1"), dirichlet=0.0)
    assert np.allclose(r.values[-1], 0.25)


def test_non_finite_rejected():
    g = grid(8)
    vals = np.zeros((8, 8))
    vals[3, 5] = np.nan
    with pytest.raises(FieldError, match="ring 4, angle index 5"):
        Field(g, 0.0, vals)
    with pytest.raises(FieldError):
        Field(g, np.inf, np.zeros((8, 8)))
    with pytest.raises(FieldError, match="shape"):
        Field(g, 0.0, np.zeros((8, 9)))


def test_overflow_names_node():
    g = grid(8)
    vals = np.zeros((8, 8))
    vals[2, 1] = -701.0
    with pytest.raises(FieldError, match="ring 3, angle index 1"):
        pde_residual(Field(g, 0.0, vals), CoefficientPair("const:1", "const:1"))


@given(c=st.floats(-100, 100))
def test_laplacian_of_constant(c):
    g = grid(64)
    lap = operators.apply_laplacian(g, np.full(g.n_nodes, c))
    assert np.max(np.abs(lap)) <= 1e-12 * max(1.0, abs(c))


def test_laplacian_of_harmonic_log():
    p = np.array([1.6, 0.7])
    errs = []
    for n in (32, 64, 128):
        g = grid(n)
        u = _field(g, lambda x, y: np.log((x - p[0]) ** 2 + (y - p[1]) ** 2))
        lap = operators.apply_laplacian(g, u.flat)
        interior = np.concatenate([[lap[0]], lap[1 : 1 + (n - 1) * n]])
        errs.append(float(np.max(np.abs(interior))))
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) >= 1.8


# sampling --------------------------------------------------------------------


def test_sample_outside_rejected():
    u = Field(grid(8), 0.0, np.zeros((8, 8)))
    with pytest.raises(ValueError):
        u.sample(1.2, 0.0)


@given(x=st.floats(-0.7, 0.7), y=st.floats(-0.7, 0.7), method=st.sampled_from(["linear", "cubic"]))
def test_sample_reproduces_linear_function(x, y, method):
    u = _field(grid(32), lambda a, b: 1.0 + 2.0 * a - 0.5 * b)
    assert float(u.sample(x, y, method)) == pytest.approx(1.0 + 2.0 * x - 0.5 * y, abs=1e-2 if method == "linear" else 1e-4)


# snapshots -------------------------------------------------------------------


def _sample_field():
    return bubble_field(BubbleSpec((0.2, -0.1), 30.0, sign=-1), grid(16, 24)).with_label("snap")


def test_snapshot_layout(tmp_path):
    u = _sample_field()
    p = tmp_path / "u.sgfld"
    write_snapshot(u, p)
    data = p.read_bytes()
    assert data[:6] == b"SGFLD1"
    n_r, n_t = struct.unpack_from("<II", data, 6)
    radius, center = struct.unpack_from("<dd", data, 14)
    assert (n_r, n_t, radius, center) == (16, 24, 1.0, u.center)
    vals = np.frombuffer(data, "<f8", offset=30)
    assert np.array_equal(vals.reshape(16, 24), u.values)
    assert len(data) == 30 + 8 * 16 * 24


def test_snapshot_round_trip_is_bit_exact(tmp_path):
    u = _sample_field()
    p = tmp_path / "u.sgfld"
    write_snapshot(u, p)
    v = read_snapshot(p)
    assert v.grid == u.grid
    assert v.center == u.center and np.array_equal(v.values, u.values)
    q = tmp_path / "v.sgfld"
    write_snapshot(v, q)
    assert q.read_bytes() == p.read_bytes()


def test_truncated_snapshot(tmp_path):
    p = tmp_path / "u.sgfld"
    write_snapshot(_sample_field(), p)
    data = p.read_bytes()
    p.write_bytes(data[:-8])
    with pytest.raises(SnapshotError, match=f"expected {len(data)} bytes, got {len(data) - 8}"):
        read_snapshot(p)
    p.write_bytes(data[:10])
    with pytest.raises(SnapshotError, match="truncated"):
        read_snapshot(p)


def test_foreign_endian_header(tmp_path):
    u = _sample_field()
    p = tmp_path / "u.sgfld"
    header = struct.pack(">6sIIdd", b"SGFLD1", 16, 24, 1.0, u.center)
    p.write_bytes(header + u.values.astype(">f8").tobytes())
    with pytest.raises(SnapshotError):
        read_snapshot(p)


def test_bad_magic(tmp_path):
    p = tmp_path / "u.sgfld"
    write_snapshot(_sample_field(), p)
    data = bytearray(p.read_bytes())
    data[:6] = b"SGFLD2"
    p.write_bytes(bytes(data))
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(p)


def test_json_export_lossless(tmp_path):
    u = _sample_field()
    p = tmp_path / "u.json"
    save_json(u, p)
    v = load_json(p)
    assert v.grid == u.grid and v.center == u.center and np.array_equal(v.values, u.values)
    assert json.loads(p.read_text())["label"] == "snap"
