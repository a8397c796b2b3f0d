'''
Linear finite elements for the Laplace-Beltrami operator on a
MetricSurface or a Subsurface.

Stiffness and consistent mass matrices are assembled per triangle from
the metric backend of the surface and stored as scipy csc matrices in
the local vertex numbering of the region. Dirichlet conditions are
imposed by keeping only the interior rows and columns.
'''

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import sparse

from systole_lab.geometry.surface import MetricSurface, Subsurface
from systole_lab.utils.errors import DegenerateTriangle

logger = logging.getLogger(__name__)

Region = Union[MetricSurface, Subsurface]


def local_surface(F: Region):
    '''
    Standalone surface for a region.

    Returns:
        (surface, vertex_map): vertex_map sends local vertex ids to the parent
    '''
    if isinstance(F, Subsurface):
        return F.as_surface()
    return F, np.arange(F.n_vertices)


def _cot_matrices(surf: MetricSurface):
    L = surf.lengths
    area = surf.triangle_areas
    sq = L * L
    K = np.zeros((surf.n_triangles, 3, 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        # cotangent of the angle at corner k, opposite edge (i, j)
        cot = (sq[:, i] + sq[:, j] - sq[:, k]) / (4.0 * area)
        K[:, i, j] = K[:, j, i] = -0.5 * cot
    K[:, range(3), range(3)] = -K.sum(axis=2)
    M = np.repeat((area / 12.0)[:, None, None], 3, axis=1).repeat(3, axis=2)
    M[:, range(3), range(3)] = area[:, None] / 6.0
    return K, M


def _chart_matrices(surf: MetricSurface):
    uv = surf.uv
    g = surf.quad_metric
    e1 = uv[:, 1] - uv[:, 0]
    e2 = uv[:, 2] - uv[:, 0]
    det_j = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    param_area = 0.5 * np.abs(det_j)
    # gradients of the barycentric coordinates in chart coordinates
    grads = np.empty((surf.n_triangles, 3, 2))
    grads[:, 1, 0] = e2[:, 1] / det_j
    grads[:, 1, 1] = -e2[:, 0] / det_j
    grads[:, 2, 0] = -e1[:, 1] / det_j
    grads[:, 2, 1] = e1[:, 0] / det_j
    grads[:, 0] = -grads[:, 1] - grads[:, 2]

    det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    rho = np.sqrt(det_g)
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    inv /= det_g[..., None, None]
    # midpoint rule is exact for the constant gradients
    weight = (inv * rho[..., None, None]).mean(axis=1) * param_area[:, None, None]
    K = np.einsum('fia,fab,fjb->fij', grads, weight, grads)

    # basis values at edge midpoints: 1/2 on the edge endpoints, 0 opposite
    phi = np.full((3, 3), 0.5)
    np.fill_diagonal(phi, 0.0)
    M = np.einsum('fq,qi,qj->fij', rho, phi, phi) * (param_area / 3.0)[:, None, None]
    return K, M


def local_matrices(surf: MetricSurface):
    '''(F, 3, 3) element stiffness and mass matrices.'''
    area = surf.triangle_areas
    bad = np.nonzero(~(area > 0))[0]
    if bad.size:
        raise DegenerateTriangle(f'{bad.size} triangles with zero metric area, first {int(bad[0])}')
    if surf.is_chart:
        return _chart_matrices(surf)
    return _cot_matrices(surf)


def _global(surf: MetricSurface, local):
    tri = surf.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = surf.n_vertices
    return sparse.csc_matrix((local.ravel(), (rows, cols)), shape=(n, n))


@dataclass(frozen=True, eq=False)
class Assembly:
    '''
    Attributes:
        stiffness, mass: interior blocks (Dirichlet eliminated)
        interior: local ids of the kept vertices
        full_stiffness, full_mass: matrices on all local vertices
        surface: the standalone surface the matrices live on
        vertex_map: local -> parent vertex ids
    '''
    stiffness: sparse.csc_matrix
    mass: sparse.csc_matrix
    interior: np.ndarray
    full_stiffness: sparse.csc_matrix
    full_mass: sparse.csc_matrix
    surface: MetricSurface
    vertex_map: np.ndarray

    @property
    def closed(self):
        return self.surface.is_closed

    def extend(self, values):
        '''Interior vector padded with zeros on the boundary.'''
        out = np.zeros(self.surface.n_vertices)
        out[self.interior] = values
        return out


def assemble(F: Region):
    surf, vmap = local_surface(F)
    K_loc, M_loc = local_matrices(surf)
    K = _global(surf, K_loc)
    M = _global(surf, M_loc)
    used = surf.used_vertices
    if surf.is_closed:
        interior = np.nonzero(used)[0]
    else:
        interior = np.nonzero(used & ~surf.boundary_vertex_mask)[0]
    K_int = K[interior][:, interior].tocsc()
    M_int = M[interior][:, interior].tocsc()
    logger.debug(f'FEM: assembled {surf.n_triangles} triangles, {len(interior)} unknowns')
    return Assembly(K_int, M_int, interior, K, M, surf, vmap)
