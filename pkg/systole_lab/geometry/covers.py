'''
Cutting and gluing along simple closed loops: cyclic covers and the
incompressibility test for annuli and cross caps.
'''

import enum
import logging

import numpy as np

from systole_lab.geometry.geodesics import (
    LoopResult,
    bounds_disc,
    cut_labels,
    homology_of,
    shortest_essential_loop,
    shortest_in_homotopy_class,
)
from systole_lab.geometry.surface import MetricSurface, Subsurface, TopoClass
from systole_lab.utils.errors import NonSimpleLoop, OneSidedLoop, SeparatingLoop, WrongClass

logger = logging.getLogger(__name__)


class Compressibility(str, enum.Enum):
    INCOMPRESSIBLE = 'Incompressible'
    COMPRESSIBLE = 'Compressible'
    UNKNOWN = 'Unknown'


def classify_incompressible(F: Subsurface):
    '''
    Incompressible when the core of F is homologically nontrivial in the
    parent, Compressible when the core cuts a disc off the parent, Unknown
    otherwise.
    '''
    if F.topo_class not in (TopoClass.ANNULUS, TopoClass.CROSS_CAP):
        raise WrongClass(f'expected an annulus or cross cap, got {F.topo_class.value}')
    S = F.parent
    basis = homology_of(S)
    if F.topo_class is TopoClass.ANNULUS:
        cores = list(F.boundary_loops)
    else:
        surf, vmap = F.as_surface()
        core = shortest_essential_loop(surf, one_sided=True)
        if core is None:
            cores = [shortest_in_homotopy_class(F, certify=False).mesh_path]
        else:
            cores = [vmap[core.mesh_path]]
    for core in cores:
        if basis.is_essential(basis.path_class(core)):
            return Compressibility.INCOMPRESSIBLE
    for core in cores:
        if bounds_disc(S, core):
            return Compressibility.COMPRESSIBLE
    return Compressibility.UNKNOWN


def _loop_path(loop):
    if isinstance(loop, LoopResult):
        path = loop.mesh_path if loop.mesh_path is not None else loop.vertices
    else:
        path = loop
    return np.asarray(path, dtype=np.int64)


def side_labels(S: MetricSurface, path):
    '''
    Split the corners at loop vertices into the two sides of a closed path.

    Returns:
        dict vertex -> set of triangles on the left side

    Raises:
        OneSidedLoop: walking the left side around the loop comes back on the right
    '''
    basis = homology_of(S)
    ids, _ = basis.path_edges(path)
    tri = S.triangles
    tri_edge = S.tri_edge
    faces = S.edge_faces
    m = len(path)

    def rotate(vertex, face, edge, stop):
        collected = [face]
        for _ in range(S.n_triangles):
            lv = int(np.nonzero(tri[face] == vertex)[0][0])
            k = int(np.nonzero(tri_edge[face] == edge)[0][0])
            other = int(tri_edge[face, 3 - lv - k])
            if other == stop:
                return collected
            f0, f1 = faces[other]
            if f1 < 0:
                raise SeparatingLoop('loop runs into the boundary')
            face = int(f1 if f0 == face else f0)
            edge = other
            collected.append(face)
        raise NonSimpleLoop('fan rotation did not reach the outgoing edge')

    start_face = int(faces[ids[0], 0])
    left = {}
    face = start_face
    for i in range(1, m + 1):
        vertex = int(path[i % m])
        incoming = int(ids[i - 1])
        outgoing = int(ids[i % m])
        fan = rotate(vertex, face, incoming, outgoing)
        left[vertex] = set(fan)
        face = fan[-1]
    if face != start_face:
        raise OneSidedLoop('loop is one-sided')
    return left


def cyclic_cover(S: MetricSurface, loop, sheets, closed=True):
    '''
    Cut S along a simple two-sided non-separating loop and glue `sheets`
    copies cyclically (closed=True) or in a chain with two boundary loops.

    Raises:
        NonSimpleLoop, OneSidedLoop, SeparatingLoop
    '''
    k = int(sheets)
    if k < 1:
        raise ValueError(f'number of sheets must be positive, got {k}')
    path = _loop_path(loop)
    if len(np.unique(path)) != len(path):
        raise NonSimpleLoop('cut loop visits a vertex twice')
    basis = homology_of(S)
    if basis.path_one_sided(path):
        raise OneSidedLoop('cannot build a cyclic cover along a one-sided loop')
    n_comp, _ = cut_labels(S, path)
    if n_comp > S.components[0]:
        raise SeparatingLoop('cut loop separates the surface')
    left = side_labels(S, path)

    V = S.n_vertices
    tri = np.asarray(S.triangles, dtype=np.int64)
    on_left = np.zeros(tri.shape, dtype=bool)
    for v, faces in left.items():
        faces = np.fromiter(faces, dtype=np.int64)
        on_left[faces] |= tri[faces] == v
    on_loop = np.zeros(V, dtype=bool)
    on_loop[path] = True
    # corners on the right of the loop belong to the next sheet's copy
    step = (on_loop[tri] & ~on_left).astype(np.int64)
    levels = k if closed else k + 1

    triangles = []
    for s in range(k):
        level = s + step
        if closed:
            level %= k
        triangles.append(level * V + tri)
    triangles = np.concatenate(triangles)
    used, triangles = np.unique(triangles.ravel(), return_inverse=True)
    triangles = triangles.reshape(-1, 3)

    def tile(arr):
        return None if arr is None else np.concatenate([arr] * k)

    cover = MetricSurface(
        triangles=triangles,
        lengths=tile(S.lengths),
        n_vertices=len(used),
        uv=tile(S.uv),
        quad_metric=tile(S.quad_metric),
        curvature=tile(S.curvature),
        boundary_turning=tuple(S.boundary_turning) * k if closed else (),
        model='cyclic_cover',
        model_data={'base': S.model, 'sheets': k, 'closed': bool(closed), 'levels': levels},
        expected_chi=k * S.chi,
    )
    logger.info(f'Covers: {"closed" if closed else "chain"} {k}-sheeted cover, {cover.summary()}')
    return cover
