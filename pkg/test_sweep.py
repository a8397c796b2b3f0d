'''
Level set sweeps of ground state densities.
'''

import math

import numpy as np
import pytest

from systole_lab.spectral.solver import lambda0
from systole_lab.spectral.sweep import (
    area_weighted_quantiles,
    ground_state_sweep_check,
    superlevel_fraction,
    sweep,
)
from systole_lab.utils.errors import NegativeDensity


@pytest.fixture(scope='module')
def disc_ground_state(unit_disc):
    return lambda0(unit_disc)


def test_constant_density(unit_disc):
    profile = sweep(unit_disc, np.ones(unit_disc.n_vertices))
    assert profile.thresholds.tolist() == [0.0, 1.0]
    assert profile.areas == pytest.approx([unit_disc.area] * 2)
    assert profile.integral_psi == pytest.approx(unit_disc.area)
    assert profile.cavalieri_error == pytest.approx(0.0, abs=1e-12)
    assert profile.integral_grad == pytest.approx(0.0, abs=1e-12)
    assert profile.cheeger_ratio() == math.inf


def test_cavalieri_and_coarea(unit_disc, disc_ground_state):
    profile = sweep(unit_disc, disc_ground_state.ground_state ** 2)
    assert profile.thresholds[0] == 0.0
    assert np.all(np.diff(profile.thresholds) > 0)
    assert np.all(np.diff(profile.areas) <= 1e-12)
    assert profile.areas[0] == pytest.approx(unit_disc.area)
    assert profile.cavalieri_error < 5e-3
    assert profile.coarea_error < 2e-2


def test_ground_state_cheeger_ratio_of_disc(unit_disc, disc_ground_state):
    profile = sweep(unit_disc, disc_ground_state.ground_state)
    assert profile.cheeger_ratio() == pytest.approx(2.0, rel=0.03)


def test_negative_density(unit_disc):
    psi = np.ones(unit_disc.n_vertices)
    psi[5] = -1e-3
    with pytest.raises(NegativeDensity):
        sweep(unit_disc, psi)


def test_density_shape(unit_disc):
    with pytest.raises(ValueError):
        sweep(unit_disc, np.ones(3))


def test_ground_state_sweep_check(unit_disc, disc_ground_state):
    check = ground_state_sweep_check(unit_disc, disc_ground_state)
    assert check.holds
    assert check.lhs > 0
    assert check.rhs == pytest.approx(
        2.0 * math.sqrt(disc_ground_state.lambda0) * sweep(unit_disc, disc_ground_state.ground_state ** 2).integral_psi)


def test_ground_state_sweep_check_on_cylinder(flat_cylinder):
    check = ground_state_sweep_check(flat_cylinder, lambda0(flat_cylinder))
    assert check.holds


def test_superlevel_fraction_of_one_triangle():
    vals = np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.5, 1.0]])
    out = superlevel_fraction(vals, 0.5)
    assert out == pytest.approx([0.75, 0.25, 0.5])
    assert superlevel_fraction(vals, 0.0) == pytest.approx([1.0, 1.0, 1.0])


def test_area_weighted_quantiles():
    values = np.array([3.0, 1.0, 2.0])
    weights = np.array([1.0, 1.0, 2.0])
    assert area_weighted_quantiles(values, weights, [0.2, 0.5, 0.9]).tolist() == [1.0, 2.0, 3.0]
