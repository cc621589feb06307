import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from mcnormal import core, shape
from mcnormal.core import McNParams
from mcnormal.errors import DomainError

shapes = st.floats(min_value=0.1, max_value=6.0)


def test_ds_dz_matches_finite_differences():
    h = 1e-6
    for a, b, c in [(0.15, 0.18, 0.75), (2, 3, 1.5), (0.5, 4, 2.5)]:
        for z in np.linspace(-3, 3, 13):
            fd = (shape.s_fn(z + h, a, b, c) - shape.s_fn(z - h, a, b, c)) / (2 * h)
            assert shape.ds_dz(z, a, b, c) == pytest.approx(fd, abs=1e-6)


def test_s_vanishes_at_zero_when_a_equals_b_and_c_is_one():
    assert shape.s_fn(0.0, 0.7, 0.7, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_normal_single_mode_at_zero():
    cps = shape.critical_points(1, 1, 1)
    assert len(cps) == 1 and cps[0].kind == "mode"
    assert cps[0].z == pytest.approx(0.0, abs=1e-10)


def test_skew_normal_mode_by_direct_maximization():
    p = McNParams(2, 1, 1)
    direct = optimize.minimize_scalar(lambda z: -core.log_pdf(p, z), bracket=(-1, 0.5, 2), tol=1e-12).x
    (z,) = shape.modes(p)
    assert z == pytest.approx(direct, abs=1e-6)
    assert z == pytest.approx(0.5061, abs=1e-4)


def test_bimodal_example():
    cps = shape.critical_points(0.15, 0.18, 0.75)
    assert [cp.kind for cp in cps] == ["mode", "antimode", "mode"]
    assert all(cp.confirmed for cp in cps)
    assert all(abs(cp.s_value) < shape.ROOT_TOL for cp in cps)
    assert shape.mode_count(0.15, 0.18, 0.75) == 2


def test_modes_on_original_scale():
    p = McNParams(0.15, 0.18, 0.75, 10.0, 3.0)
    zs = [cp.z for cp in shape.critical_points(0.15, 0.18, 0.75) if cp.kind == "mode"]
    assert shape.modes(p) == pytest.approx([10 + 3 * z for z in zs])


def test_critical_points_validation():
    with pytest.raises(DomainError):
        shape.critical_points(0, 1, 1)
    with pytest.raises(DomainError):
        shape.critical_points(1, 1, 1, z_range=(2, 1))
    with pytest.raises(DomainError):
        shape.critical_points(1, 1, 1, grid=50)


def test_zero_mode_condition_examples():
    assert shape.proposition1_check(1, 1, 1) == (True, True)
    assert shape.proposition1_check(0.5, 0.5, 1) == (True, True)
    assert shape.proposition1_check(0.1, 0.1, 1) == (False, False)
    # a case away from c = 1: choose b so the equality holds
    a, c = 1.2, 1.5
    b = 1 - (2 ** c - 1) * (1 - a * c) / c
    holds, zero_mode = shape.proposition1_check(a, b, c)
    assert holds and zero_mode


def test_mode_tracking():
    assert shape.mode_monotonicity_check([1, 2, 4, 8], 1.0, 1.0)
    assert shape.mode_monotonicity_check([0.5], 1.0, 1.0)
    segs = shape.track_modes(np.linspace(0.1, 0.3, 21), 0.18, 0.75)
    # the left mode dies as a grows past the boundary value
    assert len(segs) == 2
    assert len(segs[1]) < 21 or len(segs[0]) < 21
    with pytest.raises(DomainError):
        shape.track_modes([2, 1], 1, 1)


def test_sign_relation_between_dz_da_and_ds_dz():
    b, c, da = 0.18, 0.75, 1e-5
    a = 0.15
    before = shape.critical_points(a, b, c)
    after = shape.critical_points(a + da, b, c)
    assert len(before) == len(after)
    for cp0, cp1 in zip(before, after):
        dz = cp1.z - cp0.z
        assert np.sign(dz) == -np.sign(cp0.ds_dz)


def test_a_curve_at_zero_and_consistency():
    assert shape.a_curve(0.0, 0.7, 1.0) == pytest.approx(0.7, rel=1e-12)
    b, c = 0.18, 0.75
    for z0 in (-2.5, -1.0, 0.3, 1.2):
        a = shape.a_curve(z0, b, c)
        if a > 0:
            zs = [cp.z for cp in shape.critical_points(a, b, c)]
            assert min(abs(z - z0) for z in zs) < 1e-7


def test_b_curve_consistency():
    a, c = 0.4, 1.3
    for z0 in (-1.5, 0.0, 0.8):
        b = shape.b_curve(z0, a, c)
        if b > 0:
            assert shape.s_fn(z0, a, b, c) == pytest.approx(0.0, abs=1e-12)


def test_curve_guard_in_right_tail():
    with pytest.raises(DomainError):
        shape.a_curve(40.0, 0.5, 1.0)


def test_boundary_curve_separates_mode_counts():
    curve = shape.boundary_curves(np.linspace(-4, 2, 121), c=0.75, b=0.18)
    z_star, a_star = curve.star
    assert shape.mode_count(a_star * 0.98, 0.18, 0.75) == 2
    assert shape.mode_count(a_star * 1.02, 0.18, 0.75) == 1
    assert curve.records()[0].keys() == {"z", "a"}
    with pytest.raises(DomainError):
        shape.boundary_curves([0, 1, 2], c=1.0)


def test_far_left_mode_needs_a_wider_range():
    # ac = 0.01 puts the mode just below z = -10
    with pytest.warns(RuntimeWarning, match="no mode"):
        assert shape.mode_count(0.1, 6, 0.1) == 0
    (cp,) = shape.critical_points(0.1, 6, 0.1, z_range=(-40, 10), grid=4001)
    p = McNParams(0.1, 6, 0.1)
    direct = optimize.minimize_scalar(lambda z: -core.log_pdf(p, z), bounds=(-14, -8),
                                      method="bounded", options={"xatol": 1e-10}).x
    assert cp.kind == "mode" and cp.z == pytest.approx(direct, abs=1e-5)
    # deep in the tail s(z) is tiny, but the classification is scale-free
    (cp,) = shape.critical_points(0.125, 1, 0.125)
    assert cp.kind == "mode" and abs(cp.ds_dz) < 1e-12


@settings(max_examples=40, deadline=None)
@given(a=shapes, b=shapes, c=shapes)
def test_modes_are_local_maxima_and_count_is_one_or_two(a, b, c):
    cps = shape.critical_points(a, b, c, z_range=(-40, 10), grid=4001)
    n_modes = sum(cp.kind == "mode" for cp in cps)
    assert n_modes in (1, 2)
    p = McNParams(a, b, c)
    for cp in cps:
        if cp.kind == "mode":
            f0 = core.log_pdf(p, cp.z)
            assert f0 >= core.log_pdf(p, cp.z - 1e-4) and f0 >= core.log_pdf(p, cp.z + 1e-4)
