'''
Generators, subsurface classification, conformal scaling, exhaustions and covers.
'''

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from systole_lab.geometry.covers import Compressibility, classify_incompressible, cyclic_cover
from systole_lab.geometry.generators import (
    make_flat_torus,
    make_hyperbolic_disc,
    make_round_sphere,
    make_warped_cylinder,
)
from systole_lab.geometry.geodesics import collar, metric_ball, shortest_essential_loop, systole_upper
from systole_lab.geometry.surface import (
    TopoClass,
    build_exhaustion,
    classify,
    conformal_scale,
    export_edge_lengths,
    export_off,
    extract_subsurface,
    gauss_bonnet_residual,
    whole,
)
from systole_lab.spectral.fem import assemble
from systole_lab.utils.errors import (
    DegenerateLattice,
    EmptySelection,
    InvalidMesh,
    NonIncreasingRadii,
    NonPositiveFactor,
    NonPositiveWarp,
    NonSimpleLoop,
    OneSidedLoop,
    SeparatingLoop,
    WrongClass,
)


# ----------------------------------------------------------------------
# generators

def test_square_torus(square_torus):
    assert square_torus.chi == 0
    assert square_torus.is_closed
    assert square_torus.boundary_loops == []
    assert square_torus.orientable
    assert square_torus.area == pytest.approx(1.0, abs=1e-12)


def test_sheared_torus_area():
    T = make_flat_torus((1.0, 0.0), (0.3, 1.1), 8)
    assert T.area == pytest.approx(1.1, abs=1e-12)
    assert T.chi == 0


def test_torus_rejects_collinear_basis():
    with pytest.raises(DegenerateLattice):
        make_flat_torus((1.0, 0.0), (2.0, 0.0), 8)


def test_torus_rejects_coarse_resolution():
    with pytest.raises(InvalidMesh):
        make_flat_torus((1.0, 0.0), (0.0, 1.0), 3)


def test_klein_bottle_is_non_orientable(klein_bottle):
    assert klein_bottle.chi == 0
    assert klein_bottle.is_closed
    assert not klein_bottle.orientable
    assert klein_bottle.area == pytest.approx(1.0, abs=1e-12)


def test_octagon_topology(octagon):
    assert octagon.chi == -2
    assert octagon.is_closed
    assert octagon.orientable


def test_octagon_area_close_to_gauss_bonnet():
    from systole_lab.geometry.generators import make_hyperbolic_octagon
    S = make_hyperbolic_octagon(8)
    assert S.area == pytest.approx(4.0 * math.pi, rel=0.05)


def test_flat_cylinder(flat_cylinder):
    assert flat_cylinder.chi == 0
    assert len(flat_cylinder.boundary_loops) == 2
    assert flat_cylinder.area == pytest.approx(0.5, rel=1e-12)
    assert whole(flat_cylinder).topo_class is TopoClass.ANNULUS


def test_cusp_piece_area():
    S = make_warped_cylinder(lambda x: np.exp(-x), (0.0, 2.0), 1.0, 16)
    assert S.area == pytest.approx(1.0 - math.exp(-2.0), rel=1e-2)


def test_warp_must_be_positive():
    with pytest.raises(NonPositiveWarp):
        make_warped_cylinder(lambda x: x - 1.0, (0.0, 2.0), 1.0, 8)


def test_hyperbolic_disc(hyperbolic_disc):
    assert hyperbolic_disc.chi == 1
    assert len(hyperbolic_disc.boundary_loops) == 1
    assert hyperbolic_disc.area == pytest.approx(2.0 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-2)


def test_small_hyperbolic_disc_is_nearly_euclidean():
    S = make_hyperbolic_disc(0.05, 8)
    assert S.area / (math.pi * 0.05 ** 2) == pytest.approx(1.0, rel=1e-2)


def test_gauss_bonnet_residual_shrinks_under_refinement():
    residuals = [gauss_bonnet_residual(make_hyperbolic_disc(1.0, n)) for n in (4, 8, 16)]
    assert residuals[2] < residuals[0]
    assert residuals[2] < 0.01 * 2.0 * math.pi * (math.cosh(1.0) - 1.0)


def test_round_sphere():
    S = make_round_sphere(1.0, 4)
    assert S.chi == 2
    assert S.is_closed
    assert S.area == pytest.approx(4.0 * math.pi, rel=0.05)


# ----------------------------------------------------------------------
# subsurfaces

@pytest.mark.parametrize('chi,loops,orientable,expected', [
    (1, 1, True, TopoClass.DISC),
    (0, 2, True, TopoClass.ANNULUS),
    (0, 1, False, TopoClass.CROSS_CAP),
    (0, 2, False, TopoClass.OTHER),
    (-1, 3, True, TopoClass.OTHER),
    (0, 0, True, TopoClass.OTHER),
])
def test_classify(chi, loops, orientable, expected):
    assert classify(chi, loops, orientable) is expected


def test_small_ball_on_torus_is_disc(square_torus):
    ball = metric_ball(square_torus, 0, 0.2)
    assert ball.topo_class is TopoClass.DISC
    assert ball.chi == 1


def test_band_on_cylinder_is_annulus(flat_cylinder):
    x = flat_cylinder.positions[:, 0]
    band = extract_subsurface(flat_cylinder, flat_cylinder.centroid_values(x) < 0.25)
    assert band.topo_class is TopoClass.ANNULUS
    assert band.area == pytest.approx(0.25, rel=1e-12)


def test_whole_closed_surface_is_other(square_torus):
    F = extract_subsurface(square_torus, np.ones(square_torus.n_triangles, dtype=bool))
    assert F.topo_class is TopoClass.OTHER


def test_empty_selection(square_torus):
    with pytest.raises(EmptySelection):
        extract_subsurface(square_torus, lambda t: False)


@given(st.lists(st.integers(min_value=0, max_value=511), min_size=1, max_size=200, unique=True))
def test_classification_agrees_with_euler_characteristic(ids):
    T = make_flat_torus((1.0, 0.0), (0.0, 1.0), 16)
    F = extract_subsurface(T, ids)
    surf = F.surface
    used = int(surf.used_vertices.sum())
    assert F.chi == used - surf.n_edges + surf.n_triangles
    assert F.topo_class is classify(F.chi, len(F.boundary_loops), F.orientable, F.is_connected,
                                    surf.pinched)
    assert F.area == pytest.approx(len(ids) / (2.0 * 16 * 16), rel=1e-9)


def test_boundary_length_of_band(flat_cylinder):
    x = flat_cylinder.positions[:, 0]
    band = extract_subsurface(flat_cylinder, flat_cylinder.centroid_values(x) < 0.25)
    assert band.boundary_length == pytest.approx(2.0, rel=1e-12)


# ----------------------------------------------------------------------
# conformal scaling

def test_unit_factor_is_identity(square_torus):
    S = conformal_scale(square_torus, np.ones(square_torus.n_vertices))
    assert np.array_equal(S.lengths, square_torus.lengths)


def test_constant_factor_scales_area_and_lengths(square_torus):
    S = conformal_scale(square_torus, 4.0)
    assert S.area == pytest.approx(4.0 * square_torus.area, rel=1e-12)
    assert np.allclose(S.lengths, 2.0 * square_torus.lengths, rtol=1e-14)


def test_constant_factor_keeps_stiffness(square_torus):
    base = assemble(whole(square_torus))
    scaled = assemble(whole(conformal_scale(square_torus, 4.0)))
    assert abs(scaled.full_stiffness - base.full_stiffness).max() <= 1e-12
    assert abs(scaled.full_mass - 4.0 * base.full_mass).max() <= 1e-12


def test_constant_factor_on_chart_surface(flat_cylinder):
    S = conformal_scale(flat_cylinder, 9.0)
    assert S.area == pytest.approx(9.0 * flat_cylinder.area, rel=1e-12)
    base = assemble(whole(flat_cylinder))
    scaled = assemble(whole(S))
    assert abs(scaled.full_stiffness - base.full_stiffness).max() <= 1e-12


def test_factor_must_be_positive(square_torus):
    f = np.ones(square_torus.n_vertices)
    f[3] = 0.0
    with pytest.raises(NonPositiveFactor):
        conformal_scale(square_torus, f)


# ----------------------------------------------------------------------
# exhaustions

def test_exhaustion_nested(exp_funnel):
    fam = build_exhaustion(exp_funnel, (1.0, 2.0, 3.0))
    assert len(fam.truncations) == 3
    for inner, outer in zip(fam.truncations, fam.truncations[1:]):
        assert outer.contains_triangles(inner)
    for K in fam.truncations:
        assert K.chi == exp_funnel.chi
    for i in range(3):
        assert fam.complement(i).topo_class is TopoClass.ANNULUS
        assert fam.complement(i, far=5.0).topo_class is TopoClass.ANNULUS


def test_exhaustion_needs_increasing_radii(exp_funnel):
    with pytest.raises(NonIncreasingRadii):
        build_exhaustion(exp_funnel, (2.0, 1.0))


# ----------------------------------------------------------------------
# covers and incompressibility

@pytest.mark.parametrize('k', [1, 2, 3])
def test_closed_cover_scales_area(square_torus, k):
    core = systole_upper(square_torus)
    cover = cyclic_cover(square_torus, core, k, closed=True)
    assert cover.is_closed
    assert cover.chi == 0
    assert cover.area == pytest.approx(k * square_torus.area, rel=1e-12)


def test_chain_cover_is_long_cylinder(square_torus):
    core = systole_upper(square_torus)
    cover = cyclic_cover(square_torus, core, 3, closed=False)
    assert len(cover.boundary_loops) == 2
    assert cover.area == pytest.approx(3.0, rel=1e-12)
    assert whole(cover).topo_class is TopoClass.ANNULUS
    for loop in cover.boundary_loops:
        ids = np.isin(cover.edges, loop).all(axis=1) & (cover.edge_face_count == 1)
        assert cover.edge_lengths[ids].sum() == pytest.approx(core.length, rel=1e-12)


def test_cover_rejects_one_sided_loop(klein_bottle):
    loop = shortest_essential_loop(klein_bottle, one_sided=True)
    with pytest.raises(OneSidedLoop):
        cyclic_cover(klein_bottle, loop, 2)


def test_cover_rejects_separating_ring(flat_cylinder):
    ring = 8 * 32 + np.arange(32)
    with pytest.raises(SeparatingLoop):
        cyclic_cover(flat_cylinder, ring, 2)


def test_cover_rejects_contractible_loop(square_torus):
    # link of vertex 0: (1,0) (1,1) (0,1) (-1,0) (-1,-1) (0,-1)
    link = np.array([1, 17, 16, 15, 255, 240])
    with pytest.raises(SeparatingLoop):
        cyclic_cover(square_torus, link, 2, closed=False)


def test_cover_rejects_repeated_vertex(square_torus):
    loop = np.concatenate([np.arange(16), [0]])
    with pytest.raises(NonSimpleLoop):
        cyclic_cover(square_torus, loop, 2)


def test_collar_of_systole_is_incompressible(square_torus):
    core = systole_upper(square_torus)
    F = collar(square_torus, core, 0.2)
    assert F.topo_class is TopoClass.ANNULUS
    assert classify_incompressible(F) is Compressibility.INCOMPRESSIBLE


def test_annulus_in_disc_is_compressible(unit_disc):
    r = unit_disc.centroid_values(unit_disc.radial)
    ring = extract_subsurface(unit_disc, (r > 0.25) & (r < 0.75))
    assert ring.topo_class is TopoClass.ANNULUS
    assert classify_incompressible(ring) is Compressibility.COMPRESSIBLE


def test_mobius_band_on_klein_bottle(klein_bottle):
    loop = shortest_essential_loop(klein_bottle, one_sided=True)
    F = collar(klein_bottle, loop, 0.15)
    assert F.topo_class is TopoClass.CROSS_CAP
    assert classify_incompressible(F) is Compressibility.INCOMPRESSIBLE


def test_incompressibility_needs_annulus(square_torus):
    with pytest.raises(WrongClass):
        classify_incompressible(metric_ball(square_torus, 0, 0.2))


# ----------------------------------------------------------------------
# export

def test_export_off(tmp_path, unit_disc):
    path = tmp_path / 'disc.off'
    export_off(unit_disc, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == 'OFF'
    assert lines[1].split() == [str(unit_disc.n_vertices), str(unit_disc.n_triangles), str(unit_disc.n_edges)]
    assert len(lines) == 2 + unit_disc.n_vertices + unit_disc.n_triangles

    table = tmp_path / 'disc.csv'
    export_edge_lengths(unit_disc, str(table))
    rows = table.read_text().splitlines()
    assert rows[0] == 'v0,v1,length'
    assert len(rows) == 1 + unit_disc.n_edges
