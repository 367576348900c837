import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import grid
from oracles import radial_mass
from sglab import BubbleSpec, CoefficientPair, Field, SyntheticFamily, area_integral, bubble_field, dilate, select_bubbles, synth_family
from sglab.analysis import disk_masses
from sglab.grid import GridError
from sglab.liouville import bubble_mass, bubble_profile

ONE_SIGNED = CoefficientPair("const:1", "const:1", one_signed=True)


def test_total_mass_on_unit_disk():
    f = lambda x, y: np.exp(bubble_profile(x, y, (0.0, 0.0), 50.0))  # noqa: E731
    sigma = area_integral(grid(64), f, ((0.0, 0.0), 1.0), (256, 16)) / (2 * np.pi)
    assert sigma == pytest.approx(4 - 4 / 2501, abs=1e-8)


def test_total_mass_native_weights():
    u = bubble_field(BubbleSpec((0.0, 0.0), 50.0), grid(256, 64))
    sigma = area_integral(u.grid, lambda x, y: np.exp(u.sample(x, y))) / (2 * np.pi)
    assert sigma == pytest.approx(4 - 4 / 2501, abs=1e-8)


def test_peak_value():
    u = bubble_field(BubbleSpec((0.0, 0.0), 10.0), grid(16))
    assert abs(u.center - np.log(800.0)) <= 1e-12


def test_peak_with_coefficient():
    spec = BubbleSpec((0.3, -0.2), 10.0, h_value=1.7)
    assert float(spec(0.3, -0.2)) == pytest.approx(np.log(800.0 / 1.7), abs=1e-12)


def test_tail_constant():
    lam = 50.0
    t = np.linspace(0, 2 * np.pi, 17)
    x, y = 0.5 * np.cos(t), 0.5 * np.sin(t)
    tail = bubble_profile(x, y, (0.0, 0.0), lam) + 4 * np.log(0.5)
    assert np.max(np.abs(tail - np.log(8 / lam**2))) < 1e-2


def test_negative_sign_and_validation():
    spec = BubbleSpec((0.0, 0.0), 5.0, sign=-1)
    assert float(spec(0.0, 0.0)) == pytest.approx(-np.log(200.0))
    for bad in (dict(lam=0.0), dict(lam=1.0, sign=2), dict(lam=1.0, h_value=0.0)):
        with pytest.raises(ValueError):
            BubbleSpec((0.0, 0.0), **bad)
    with pytest.raises(ValueError):
        BubbleSpec((1.0, 0.0), 5.0)


def test_bubble_solves_liouville_analytically():
    # Lap v = -h e^v checked with a centered 5-point stencil at spacing 1e-3
    spec = BubbleSpec((0.1, 0.2), 7.0, h_value=1.3)
    d = 1e-3
    pts = np.array([[0.0, 0.0], [0.3, -0.1], [-0.4, 0.5]])
    for x, y in pts:
        lap = (spec(x + d, y) + spec(x - d, y) + spec(x, y + d) + spec(x, y - d) - 4 * spec(x, y)) / d**2
        assert lap + 1.3 * np.exp(spec(x, y)) == pytest.approx(0.0, abs=1e-4 * (1 + abs(lap)))


# synthetic families ----------------------------------------------------------


def test_empty_family_is_zero():
    u = synth_family(SyntheticFamily((), 0.0), grid(16))
    assert u.center == 0.0 and np.all(u.values == 0.0)


def test_single_bubble_family_masses():
    u = synth_family(SyntheticFamily((BubbleSpec((0.0, 0.0), 50.0),)), grid(128))
    s1, s2 = disk_masses(u, ONE_SIGNED, (0.0, 0.0), 0.5)
    # closed form gives 4 (1 - 1/626) = 3.9936, i.e. 6.4e-3 below 4
    assert s1 == pytest.approx(radial_mass(50.0, 0.5), abs=2e-3)
    assert s2 < 1e-3


def test_opposite_pair_detected_with_own_signs():
    fam = SyntheticFamily((BubbleSpec((0.0, 0.0), 200.0, 1), BubbleSpec((0.4, 0.0), 200.0, -1)))
    u = synth_family(fam, grid(256))
    disks = select_bubbles(u, CoefficientPair("const:1", "const:1"))
    assert len(disks) == 2
    by_x = sorted(disks, key=lambda d: d.center[0])
    assert [d.sign for d in by_x] == [1, -1]
    assert by_x[0].center == pytest.approx((0.0, 0.0), abs=0.01)
    assert by_x[1].center == pytest.approx((0.4, 0.0), abs=0.01)


def test_overlap_warning_on_label():
    fam = SyntheticFamily((BubbleSpec((0.0, 0.0), 20.0), BubbleSpec((0.2, 0.0), 20.0, -1)))
    with pytest.warns(UserWarning, match="overlap"):
        u = synth_family(fam, grid(16))
    assert "WARNING" in u.label
    assert fam.overlaps() == [(0, 1)]


def test_separated_family_has_no_warning():
    fam = SyntheticFamily((BubbleSpec((0.0, 0.0), 100.0), BubbleSpec((0.2, 0.0), 100.0, -1)), background=-1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        u = synth_family(fam, grid(16))
    assert "WARNING" not in u.label
    assert float(u.sample(0.0, 0.9)) == pytest.approx(float(fam(0.0, 0.9)), abs=1e-2)


@given(R=st.floats(0.01, 50.0), lam=st.floats(5.0, 500.0))
def test_mass_scale_invariance(R, lam):
    # keep the disk inside the unit disk
    r = min(R / lam, 0.99)
    R = r * lam
    expected = 4 * R**2 / (1 + R**2)
    assert bubble_mass(lam, r) == pytest.approx(expected, rel=1e-12)
    assert radial_mass(lam, r) == pytest.approx(expected, rel=1e-9, abs=1e-13)


# dilation --------------------------------------------------------------------


def test_dilate_at_own_center():
    lam = 40.0
    u = bubble_field(BubbleSpec((0.0, 0.0), lam), grid(128))
    v = dilate(u, (0.0, 0.0), 1.0 / lam, window=5.0, size=(64, 64), method="cubic")
    assert v.center == pytest.approx(np.log(8.0), abs=1e-3)
    # the rescaled field is the unit-scale profile
    assert float(v.sample(2.0, 1.0, "cubic")) == pytest.approx(float(bubble_profile(2.0, 1.0, (0, 0), 1.0)), abs=1e-3)


def test_dilate_identity():
    u = Field.from_function(grid(32), lambda x, y: np.sin(2 * x) + y * y)
    v = dilate(u, (0.0, 0.0), 1.0)
    assert np.max(np.abs(v.flat - u.flat)) <= 1e-6


def test_dilate_preserves_mass():
    lam, eps, W = 60.0, 0.02, 10.0
    c = (0.15, 0.1)
    u = bubble_field(BubbleSpec(c, lam, h_value=1.0), grid(256))
    v = dilate(u, c, eps, window=W, size=(128, 128), method="cubic")
    before = disk_masses(u, ONE_SIGNED, c, eps * W)[0]
    after = disk_masses(v, ONE_SIGNED, (0.0, 0.0), W * (1 - 1e-12))[0]
    assert after == pytest.approx(before, abs=1e-4)


def test_dilate_window_escaping():
    u = Field(grid(16), 0.0, np.zeros((16, 16)))
    with pytest.raises(GridError):
        dilate(u, (0.5, 0.0), 0.1, window=6.0)
    with pytest.raises(ValueError):
        dilate(u, (0.0, 0.0), 0.0)
