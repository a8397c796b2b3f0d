'''
Shared fixtures for the systole-lab test suite.

Surfaces are session scoped: generators are pure and MetricSurface is
immutable, so every test can share them.
'''

import json
import os

import numpy as np
import pytest
from hypothesis import HealthCheck
from hypothesis import settings as hypothesis_settings

from systole_lab.geometry.generators import (
    make_flat_disc,
    make_flat_torus,
    make_hyperbolic_disc,
    make_hyperbolic_octagon,
    make_klein_bottle_flat,
    make_warped_cylinder,
)

hypothesis_settings.register_profile(
    'systole-lab', max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
hypothesis_settings.load_profile('systole-lab')


@pytest.fixture(scope='session')
def square_torus():
    return make_flat_torus((1.0, 0.0), (0.0, 1.0), 16)


@pytest.fixture(scope='session')
def rectangle_torus():
    return make_flat_torus((1.0, 0.0), (0.0, 2.0), 12)


@pytest.fixture(scope='session')
def klein_bottle():
    return make_klein_bottle_flat(1.0, 1.0, 12)


@pytest.fixture(scope='session')
def octagon():
    return make_hyperbolic_octagon(4)


@pytest.fixture(scope='session')
def unit_disc():
    return make_flat_disc(1.0, 12)


@pytest.fixture(scope='session')
def hyperbolic_disc():
    return make_hyperbolic_disc(1.0, 16)


@pytest.fixture(scope='session')
def flat_cylinder():
    '''[0, 1/2] x circle of length 1.'''
    return make_warped_cylinder(1.0, (0.0, 0.5), 1.0, 32)


@pytest.fixture(scope='session')
def exp_funnel():
    return make_warped_cylinder(np.exp, (0.0, 6.0), 1.0, 8, x_cells=96)


@pytest.fixture
def write_json(tmp_path):
    '''Write a JSON document under tmp_path and return its path.'''
    def _write(name, data):
        path = os.path.join(tmp_path, name)
        with open(path, 'w') as f:
            json.dump(data, f)
        return path
    return _write
