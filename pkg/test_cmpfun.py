'''
Comparison functions, collar widths and warped end profiles.
'''

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from systole_lab.geometry.cmpfun import (
    CurvatureBound,
    Side,
    WarpMode,
    cheng_ball_bound,
    collar_width,
    constant_profile,
    cs,
    ct,
    funnel_warp,
    log_derivative,
    pinched_profile,
    radial_dirichlet_eigenvalue,
    smooth_step,
    sn,
    tn,
    tube_area,
)
from systole_lab.utils.errors import InvalidProfile, NonPositiveSystole

kappas = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)
times = st.floats(min_value=0.0, max_value=1.5, allow_nan=False)


def test_reference_values():
    assert sn(-1, 0.5) == pytest.approx(0.521095, abs=1e-6)
    assert ct(-1, 1.0) == pytest.approx(1.31304, abs=1e-5)
    assert sn(1, math.pi / 2) == pytest.approx(1.0)
    assert cs(0, 3.0) == 1.0
    assert sn(0, 3.0) == 3.0


def test_curvature_bound_accepted():
    assert sn(CurvatureBound(-1.0), 0.5) == sn(-1.0, 0.5)
    with pytest.raises(ValueError):
        CurvatureBound(math.nan)


def test_ct_undefined_at_zero():
    with pytest.raises(ZeroDivisionError):
        ct(-1, 0.0)


@given(kappas, times)
def test_wronskian_identity(kappa, t):
    assert cs(kappa, t) ** 2 + kappa * sn(kappa, t) ** 2 == pytest.approx(1.0, abs=1e-9)


@given(st.floats(min_value=-1e-6, max_value=1e-6, allow_nan=False), st.floats(min_value=0.0, max_value=1.0))
def test_small_curvature_matches_flat(kappa, t):
    assert sn(kappa, t) == pytest.approx(t, abs=1e-6)
    assert cs(kappa, t) == pytest.approx(1.0, abs=1e-6)


@given(kappas, st.floats(min_value=0.01, max_value=0.7))
def test_tn_ct_are_reciprocal(kappa, t):
    assert tn(kappa, t) * ct(kappa, t) == pytest.approx(1.0, rel=1e-12)


def test_collar_widths():
    assert collar_width(1.0, Side.ONE_SIDED) == pytest.approx(0.771952, abs=1e-6)
    assert collar_width(1.0, Side.TWO_SIDED) == pytest.approx(1.406829, abs=1e-6)
    assert collar_width(1.0, 'TwoSided') == collar_width(1.0)


@pytest.mark.parametrize('value', [0.0, -1.0, math.nan])
def test_collar_width_rejects_nonpositive(value):
    with pytest.raises(NonPositiveSystole):
        collar_width(value)


def test_collar_width_small_systole_limits():
    s = 1e-6
    assert collar_width(s, Side.TWO_SIDED) + math.log(s) == pytest.approx(math.log(4.0), abs=1e-6)
    assert collar_width(s, Side.ONE_SIDED) + math.log(s) == pytest.approx(math.log(2.0), abs=1e-6)


@given(st.floats(min_value=0.05, max_value=10.0), st.floats(min_value=1.01, max_value=3.0))
def test_collar_width_decreases(s, factor):
    for side in Side:
        assert collar_width(s * factor, side) < collar_width(s, side)


def test_tube_area_hyperbolic_collar():
    area, boundary = tube_area(-1, 2.0, 0.5)
    assert area == pytest.approx(4.0 * math.sinh(0.5))
    assert boundary == pytest.approx(4.0 * math.cosh(0.5))
    one_area, one_boundary = tube_area(-1, 2.0, 0.5, Side.ONE_SIDED)
    assert one_area == pytest.approx(area)
    assert one_boundary == pytest.approx(boundary)


def test_radial_eigenvalue_flat_disc_is_bessel_root():
    assert radial_dirichlet_eigenvalue(0.0, 1.0) == pytest.approx(5.783185962946784, rel=1e-7)
    assert radial_dirichlet_eigenvalue(0.0, 2.0) == pytest.approx(5.783185962946784 / 4.0, rel=1e-7)


@pytest.mark.parametrize('radius', [2.0, 5.0])
def test_radial_eigenvalue_hyperbolic_within_cheng_bound(radius):
    value = radial_dirichlet_eigenvalue(-1.0, radius)
    assert 0.25 < value <= cheng_ball_bound(-1.0, radius)


def test_radial_eigenvalue_decreases_with_radius():
    values = [radial_dirichlet_eigenvalue(-1.0, r) for r in (2.0, 4.0, 6.0, 8.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_smooth_step():
    values = smooth_step([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert values[0] == 0.0 and values[1] == 0.0
    assert values[2] == pytest.approx(0.5)
    assert values[3] == 1.0 and values[4] == 1.0


def test_funnel_constant_curvature_is_cosh():
    profile = funnel_warp(constant_profile(-1.0), x_max=4.0)
    xs = np.linspace(0.0, 4.0, 9)
    assert np.allclose(profile(xs), np.cosh(xs), rtol=1e-8)
    assert profile.residual() < 1e-4
    assert log_derivative(profile) == pytest.approx(math.tanh(4.0), rel=1e-8)


def test_pinched_funnel_log_derivative():
    profile = funnel_warp(pinched_profile(-4.0, 1.0, 1.0), WarpMode.EXPANDING, x_max=8.0)
    assert log_derivative(profile) == pytest.approx(2.0, abs=1e-3)


def test_cusp_profile_decays():
    profile = funnel_warp(constant_profile(-1.0), WarpMode.CUSP, x_max=3.0)
    xs = np.linspace(0.0, 3.0, 7)
    assert np.allclose(profile(xs), np.exp(-xs), rtol=1e-6)


def test_expanding_profile_must_start_hyperbolic():
    with pytest.raises(InvalidProfile):
        funnel_warp(constant_profile(-2.0))


def test_cusp_profile_must_be_negative():
    with pytest.raises(InvalidProfile):
        funnel_warp(constant_profile(0.5), WarpMode.CUSP)
