'''
Truncated ends, covers, conformal changes and ground-state diagnostics.
'''

import math

import numpy as np
import pytest

from systole_lab.geometry.geodesics import systole_upper
from systole_lab.geometry.surface import build_exhaustion, whole
from systole_lab.lab import experiments
from systole_lab.utils.errors import DeltaOutOfRange, FactorNotOneOnCore, WrongClass


def test_truncation_limit_removes_inverse_square_term():
    def lam(L):
        return 0.25 + math.pi ** 2 / L ** 2
    assert experiments.truncation_limit(3.0, lam(3.0), 1.5, lam(1.5)) == pytest.approx(0.25)


def test_exp_funnel_essential_spectrum(exp_funnel):
    fam = build_exhaustion(exp_funnel, (1.0, 2.0, 3.0))
    estimate = experiments.ess_spectrum_estimate(fam)
    assert estimate.far_radius == pytest.approx(6.0)
    assert estimate.far_radius_short == pytest.approx(4.5)
    for r, value in zip(fam.radii, estimate.values):
        assert value == pytest.approx(0.25 + math.pi ** 2 / (6.0 - r) ** 2, rel=0.01)
    assert estimate.monotone
    assert estimate.limit_estimate == pytest.approx(0.25, rel=0.05)
    data = estimate.to_dict()
    assert data['radii'] == [1.0, 2.0, 3.0]
    assert data['sensitivity'] > 0


def test_essential_spectrum_arguments(exp_funnel):
    with pytest.raises(ValueError):
        experiments.ess_spectrum_estimate(build_exhaustion(exp_funnel, (1.0, 2.0)))
    fam = build_exhaustion(exp_funnel, (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        experiments.ess_spectrum_estimate(fam, far=2.5)
    with pytest.raises(ValueError):
        experiments.ess_spectrum_estimate(fam, far_fraction=1.0)


def test_cover_experiment(square_torus):
    core = systole_upper(square_torus)
    table = experiments.cover_experiment(square_torus, core, [4, 2], closed=True)
    assert [(r.sheets, r.closed) for r in table.rows] == [(2, False), (2, True), (4, False), (4, True)]
    for row in table.chain():
        assert row.lambda0 == pytest.approx((math.pi / row.sheets) ** 2, rel=0.02)
        assert row.area == pytest.approx(row.sheets)
    assert all(r.lambda0 == 0.0 for r in table.rows if r.closed)
    assert 1.9 <= table.exponent <= 2.1
    assert table.rows[0].to_dict()['cover'] == 'chain'


def test_decay_exponent_needs_two_chains():
    rows = [experiments.CoverRow(2, False, 1.0, 2.0)]
    assert math.isnan(experiments.decay_exponent(rows))


def test_core_factor():
    f = experiments.core_factor([0.0, 1.0, 1.5, 2.0, 5.0], 0.5, 1.0, 1.0)
    assert f[0] == 1.0 and f[1] == 1.0
    assert math.exp(-0.5) < f[2] < 1.0
    assert f[3] == pytest.approx(math.exp(-0.5))
    assert f[4] == pytest.approx(math.exp(-0.5))


def test_conformal_change_leaves_core_untouched(exp_funnel):
    rows = experiments.conformal_experiment(exp_funnel, [0.0, 0.5], core_radius=1.0, transition=1.0)
    assert len(rows) == 2
    assert rows[0].identical and rows[1].identical
    assert rows[1].candidate_values == rows[0].candidate_values
    assert rows[0].ess_ratio == 1.0
    assert rows[1].ess_ratio == pytest.approx(math.exp(0.5), rel=1e-6)
    assert rows[1].to_dict()['expected_ratio'] == pytest.approx(math.exp(0.5))


def test_conformal_factor_must_be_one_on_core(exp_funnel):
    with pytest.raises(FactorNotOneOnCore):
        experiments.conformal_experiment(exp_funnel, [0.5], core_radius=1.0,
                                         factor=lambda t, r: np.exp(-t * np.ones_like(r)))


def test_core_length_diagnostic_arguments(flat_cylinder, unit_disc):
    for delta in (0.0, 0.5, 0.7):
        with pytest.raises(DeltaOutOfRange):
            experiments.core_length_diagnostic(whole(flat_cylinder), delta)
    with pytest.raises(WrongClass):
        experiments.core_length_diagnostic(whole(unit_disc), 0.25)


def test_mass_concentration(flat_cylinder):
    fam = build_exhaustion(flat_cylinder, (0.125, 0.25, 0.375))
    result = experiments.mass_concentration(flat_cylinder, fam)
    assert list(result.masses) == sorted(result.masses)
    assert result.masses[1] == pytest.approx(0.5, abs=1e-6)
    assert result.constant == pytest.approx(max((i + 1) * (1.0 - m) for i, m in enumerate(result.masses)))


def test_inradius_diagnostic(flat_cylinder):
    fam = build_exhaustion(flat_cylinder, (0.125, 0.25, 0.375))
    samples = experiments.inradius_diagnostic(whole(flat_cylinder), fam)
    assert samples
    assert all(s.radius >= 0.0 for s in samples)
