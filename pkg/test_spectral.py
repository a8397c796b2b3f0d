'''
Finite element assembly and the Dirichlet eigenvalue solvers.
'''

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from systole_lab.geometry.covers import cyclic_cover
from systole_lab.geometry.cmpfun import cheng_ball_bound, radial_dirichlet_eigenvalue
from systole_lab.geometry.generators import make_flat_disc, make_flat_torus, make_hyperbolic_disc
from systole_lab.geometry.geodesics import systole_upper
from systole_lab.geometry.surface import extract_subsurface, whole
from systole_lab.spectral.fem import assemble
from systole_lab.spectral.solver import (
    extrapolate,
    lambda0,
    lambda0_refined,
    lambda_k,
    mass_in,
    rayleigh,
    richardson,
)
from systole_lab.utils.errors import DisjointRegion, EmptyInterior, SolverDivergence, ZeroVector

BESSEL_J0_ROOT_SQUARED = 5.783185962946784

_torus = make_flat_torus((1.0, 0.0), (0.0, 1.0), 8)


def band(cylinder, width):
    x = cylinder.positions[:, 0]
    return extract_subsurface(cylinder, cylinder.centroid_values(x) < width, label=f'band({width:g})')


# ----------------------------------------------------------------------
# assembly

def test_cotangent_weights_on_square_grid(square_torus):
    K = assemble(square_torus).full_stiffness.toarray()
    assert K[0, 0] == pytest.approx(4.0)
    assert K[0, 1] == pytest.approx(-1.0)
    assert K[0, 16] == pytest.approx(-1.0)
    assert K[0, 17] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(K, K.T)
    assert np.allclose(K.sum(axis=1), 0.0, atol=1e-12)


@pytest.mark.parametrize('fixture', ['square_torus', 'unit_disc', 'flat_cylinder', 'hyperbolic_disc'])
def test_mass_sums_to_area(fixture, request):
    S = request.getfixturevalue(fixture)
    M = assemble(S).full_mass
    assert M.sum() == pytest.approx(S.area, rel=1e-12)


def test_dirichlet_elimination(unit_disc):
    asm = assemble(unit_disc)
    assert asm.interior.size == unit_disc.n_vertices - len(unit_disc.boundary_loops[0])
    assert asm.stiffness.shape == (asm.interior.size, asm.interior.size)
    assert not asm.closed


# ----------------------------------------------------------------------
# lambda0

def test_flat_cylinder_is_pi_squared_over_width_squared(flat_cylinder):
    result = lambda0(flat_cylinder)
    assert result.lambda0 == pytest.approx(4.0 * math.pi ** 2, rel=0.01)
    assert result.positive
    assert result.rayleigh == pytest.approx(result.lambda0, rel=1e-8)
    assert result.ground_state @ (assemble(flat_cylinder).full_mass @ result.ground_state) == pytest.approx(1.0)


def test_closed_surface_has_zero_ground_eigenvalue(square_torus):
    result = lambda0(square_torus)
    assert result.lambda0 == 0.0
    assert result.value == 0.0


def test_flat_disc_matches_bessel_root_after_extrapolation():
    result = lambda0_refined(lambda n: make_flat_disc(1.0, n), [8, 16])
    assert result.lambda0 == pytest.approx(BESSEL_J0_ROOT_SQUARED, rel=0.03)
    assert result.lambda0 > BESSEL_J0_ROOT_SQUARED
    assert result.value == pytest.approx(BESSEL_J0_ROOT_SQUARED, rel=0.01)
    assert result.extrapolated.monotone
    assert result.error_bar > 0


# rings per radius keep the chord metric of the outer rings within a few percent
HYPERBOLIC_DISC_RESOLUTION = {2.0: 12, 4.0: 12, 6.0: 24, 8.0: 64}


def test_hyperbolic_discs_decrease_inside_cheng_bracket():
    values = []
    for radius, n in HYPERBOLIC_DISC_RESOLUTION.items():
        value = lambda0(whole(make_hyperbolic_disc(radius, n))).lambda0
        assert 0.25 < value <= cheng_ball_bound(-1.0, radius)
        assert value == pytest.approx(radial_dirichlet_eigenvalue(-1.0, radius), rel=0.1)
        values.append(value)
    assert all(a > b for a, b in zip(values, values[1:]))


def test_richardson_and_extrapolate():
    assert richardson(1.04, 1.01, 2.0) == pytest.approx(1.0)
    ext = extrapolate([1.16, 1.04, 1.01], [4, 8, 16], tol=1e-9)
    assert ext.value == pytest.approx(1.0)
    assert ext.error_bar == pytest.approx(1e-9, abs=1e-12)
    assert ext.monotone
    assert not extrapolate([1.0, 1.2, 1.1], [4, 8, 16]).monotone
    with pytest.raises(ValueError):
        extrapolate([1.0], [4])
    with pytest.raises(ValueError):
        lambda0_refined(lambda n: make_flat_disc(1.0, n), [8])


def test_empty_interior(unit_disc):
    star = extract_subsurface(unit_disc, [0])
    with pytest.raises(EmptyInterior):
        lambda0(star)


def test_iteration_cap(flat_cylinder):
    with pytest.raises(SolverDivergence):
        lambda0(flat_cylinder, tol=1e-30, max_iter=2)


@given(st.integers(min_value=3, max_value=15), st.integers(min_value=1, max_value=10))
def test_domain_monotonicity(inner, extra):
    from systole_lab.geometry.generators import make_warped_cylinder
    cylinder = make_warped_cylinder(1.0, (0.0, 1.0), 1.0, 8, x_cells=32)
    small = lambda0(band(cylinder, inner / 32.0))
    big = lambda0(band(cylinder, (inner + extra) / 32.0))
    assert small.lambda0 >= big.lambda0 * (1.0 - 1e-7)


# ----------------------------------------------------------------------
# higher eigenvalues

def test_square_torus_first_eigenvalue_has_multiplicity_four(square_torus):
    values = lambda_k(square_torus, 4)
    assert values[0] == 0.0
    assert values[1:] == pytest.approx([4.0 * math.pi ** 2] * 4, rel=0.03)


def test_rectangle_torus_first_eigenvalue(rectangle_torus):
    values = lambda_k(rectangle_torus, 2)
    assert values[1:] == pytest.approx([math.pi ** 2] * 2, rel=0.05)


def test_lambda_k_needs_unknowns(unit_disc):
    with pytest.raises(ValueError):
        lambda_k(unit_disc, 0)


# ----------------------------------------------------------------------
# rayleigh and mass

def test_rayleigh_of_ground_state(unit_disc):
    result = lambda0(unit_disc)
    assert rayleigh(unit_disc, result.ground_state) == pytest.approx(result.lambda0, rel=1e-8)


def test_rayleigh_is_an_upper_bound(unit_disc):
    r = unit_disc.radial
    trial = np.cos(0.5 * math.pi * r)
    assert rayleigh(unit_disc, trial) >= lambda0(unit_disc).lambda0


def test_rayleigh_zero_vector(unit_disc):
    with pytest.raises(ZeroVector):
        rayleigh(unit_disc, np.zeros(unit_disc.n_vertices))


def test_mass_in(flat_cylinder):
    result = lambda0(flat_cylinder)
    assert mass_in(flat_cylinder, whole(flat_cylinder), result) == pytest.approx(1.0, rel=1e-9)
    assert mass_in(flat_cylinder, band(flat_cylinder, 0.25), result) == pytest.approx(0.5, abs=1e-6)


def test_mass_in_other_surface(flat_cylinder, square_torus):
    with pytest.raises(DisjointRegion):
        mass_in(flat_cylinder, whole(square_torus))


# ----------------------------------------------------------------------
# covers

@pytest.mark.parametrize('k', [2, 4])
def test_chain_cover_of_square_torus(square_torus, k):
    core = systole_upper(square_torus)
    cover = cyclic_cover(square_torus, core, k, closed=False)
    assert lambda0(cover).lambda0 == pytest.approx((math.pi / k) ** 2, rel=0.02)


def test_closed_cover_keeps_zero_ground_eigenvalue():
    cover = cyclic_cover(_torus, systole_upper(_torus), 3, closed=True)
    assert lambda0(cover).lambda0 == 0.0
    assert lambda_k(cover, 1)[1] == pytest.approx((2.0 * math.pi / 3.0) ** 2, rel=0.05)
