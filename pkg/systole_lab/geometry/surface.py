'''
Triangulated Riemannian surfaces.

A MetricSurface is an abstract triangle mesh carrying one of two metric
backends:

- discrete: per-triangle edge lengths (flat and glued-polygon models);
- chart: per-triangle parameter coordinates plus metric tensor samples at
  the three edge midpoints (warped products, conformal discs).

Both backends expose the same per-triangle quantities (edge lengths,
areas, local frames) so FEM assembly, sweeps and shortest paths never
care which one is in use.

Local edge k of a triangle is the edge opposite its local vertex k, i.e.
(tri[(k+1)%3], tri[(k+2)%3]).
'''

import enum
import logging
import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from systole_lab.utils.errors import (
    DegenerateTriangle,
    EmptySelection,
    InvalidMesh,
    ModelMismatch,
    NonIncreasingRadii,
    NonPositiveFactor,
)

logger = logging.getLogger(__name__)

LENGTH_AGREEMENT = 1e-8
NEXT = np.array([1, 2, 0])
PREV = np.array([2, 0, 1])


class TopoClass(str, enum.Enum):
    DISC = 'Disc'
    ANNULUS = 'Annulus'
    CROSS_CAP = 'CrossCap'
    OTHER = 'Other'


VALID_CLASSES = (TopoClass.DISC, TopoClass.ANNULUS, TopoClass.CROSS_CAP)


def classify(chi, n_loops, orientable, connected=True, pinched=False):
    '''Topological class from Euler characteristic and boundary data.'''
    if not connected or pinched:
        return TopoClass.OTHER
    if chi == 1 and n_loops == 1:
        return TopoClass.DISC
    if chi == 0 and n_loops == 2 and orientable:
        return TopoClass.ANNULUS
    if chi == 0 and n_loops == 1 and not orientable:
        return TopoClass.CROSS_CAP
    return TopoClass.OTHER


def heron_area(lengths):
    '''Triangle areas from (F, 3) side lengths, numerically stable form.'''
    s = np.sort(lengths, axis=1)[:, ::-1]
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def accumulate_along_tree(pred, values):
    '''
    Sum edge values from the root to every node of a rooted forest.

    Args:
        pred: (N,) parent index, -1 at roots
        values: (N, ...) value carried by the edge pred[v] -> v (ignored at roots)

    Returns:
        (N, ...) array of path sums, computed by pointer jumping
    '''
    pred = np.asarray(pred, dtype=np.int64).copy()
    acc = np.array(values, copy=True)
    roots = pred < 0
    acc[roots] = 0
    while True:
        active = np.nonzero(pred >= 0)[0]
        if active.size == 0:
            return acc
        parents = pred[active]
        acc[active] = acc[active] + acc[parents]
        pred[active] = pred[parents]


def normalize_predecessors(pred):
    pred = np.asarray(pred, dtype=np.int64).copy()
    pred[pred < 0] = -1
    return pred


@dataclass(frozen=True, eq=False)
class MetricSurface:
    '''
    Immutable triangle mesh with a Riemannian metric.

    Attributes:
        triangles: (F, 3) vertex indices
        lengths: (F, 3) metric length of the edge opposite each local vertex
        n_vertices: number of vertices
        uv: optional (F, 3, 2) chart coordinates per triangle corner
        quad_metric: optional (F, 3, 2, 2) metric tensors at edge midpoints
        curvature: optional (F,) Gaussian curvature samples
        radial: optional (V,) radial coordinate of an end model
        positions: optional (V, d) coordinates for export and plotting
        boundary_turning: declared total geodesic curvature per boundary loop
        model: generator name
        model_data: generator specific data (lattice basis, deck generators, ...)
        expected_chi: Euler characteristic of the declared model topology
    '''
    triangles: np.ndarray
    lengths: np.ndarray
    n_vertices: int
    uv: Optional[np.ndarray] = None
    quad_metric: Optional[np.ndarray] = None
    curvature: Optional[np.ndarray] = None
    radial: Optional[np.ndarray] = None
    positions: Optional[np.ndarray] = None
    boundary_turning: Tuple[float, ...] = ()
    model: str = 'mesh'
    model_data: Dict = field(default_factory=dict)
    expected_chi: Optional[int] = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        tri = np.ascontiguousarray(self.triangles, dtype=np.int64)
        lengths = np.ascontiguousarray(self.lengths, dtype=float)
        object.__setattr__(self, 'triangles', tri)
        object.__setattr__(self, 'lengths', lengths)
        for name in ('uv', 'quad_metric', 'curvature', 'radial', 'positions'):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.ascontiguousarray(value, dtype=float))
        object.__setattr__(self, 'boundary_turning', tuple(float(t) for t in self.boundary_turning))
        for arr in (tri, lengths, self.uv, self.quad_metric, self.curvature, self.radial, self.positions):
            if arr is not None:
                arr.setflags(write=False)
        if validate:
            self._validate()

    # ------------------------------------------------------------------
    # validation

    def _validate(self):
        tri = self.triangles
        if tri.ndim != 2 or tri.shape[1] != 3 or tri.shape[0] == 0:
            raise InvalidMesh('triangles must be a non-empty (F, 3) array')
        if self.lengths.shape != tri.shape:
            raise InvalidMesh('lengths must match the triangle array shape')
        if tri.min() < 0 or tri.max() >= self.n_vertices:
            raise InvalidMesh('triangle references a vertex outside the index set')
        if np.any(tri[:, 0] == tri[:, 1]) or np.any(tri[:, 1] == tri[:, 2]) or np.any(tri[:, 0] == tri[:, 2]):
            raise InvalidMesh('triangle with a repeated vertex')
        if np.any(~np.isfinite(self.lengths)) or np.any(self.lengths <= 0):
            raise DegenerateTriangle('edge lengths must be positive and finite')
        if self.is_chart:
            if self.uv.shape != (tri.shape[0], 3, 2) or self.quad_metric.shape != (tri.shape[0], 3, 2, 2):
                raise InvalidMesh('chart data has the wrong shape')
            g = self.quad_metric
            if np.max(np.abs(g[..., 0, 1] - g[..., 1, 0])) > 1e-12 * max(1.0, np.max(np.abs(g))):
                raise InvalidMesh('metric samples must be symmetric')
            det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
            if np.any(g[..., 0, 0] <= 0) or np.any(det <= 0):
                raise DegenerateTriangle('metric samples must be positive definite')
        else:
            s = np.sort(self.lengths, axis=1)
            if np.any(s[:, 2] >= s[:, 0] + s[:, 1]):
                bad = int(np.argmax(s[:, 2] >= s[:, 0] + s[:, 1]))
                raise DegenerateTriangle(f'triangle {bad} violates the strict triangle inequality')
        if np.any(self.triangle_areas <= 0):
            raise DegenerateTriangle('triangle with zero metric area')
        # edge incidence and length agreement
        counts = self.edge_face_count
        if np.any(counts > 2):
            raise InvalidMesh('non-manifold edge shared by more than two triangles')
        spread = np.zeros(self.n_edges)
        np.maximum.at(spread, self.tri_edge.ravel(), self.lengths.ravel())
        low = np.full(self.n_edges, np.inf)
        np.minimum.at(low, self.tri_edge.ravel(), self.lengths.ravel())
        if np.any(spread - low > LENGTH_AGREEMENT * np.maximum(spread, 1e-300)):
            raise InvalidMesh('triangles disagree on the length of a shared edge')
        if self.expected_chi is not None and self.chi != self.expected_chi:
            raise InvalidMesh(f'Euler characteristic {self.chi} does not match the model ({self.expected_chi})')

    # ------------------------------------------------------------------
    # basic sizes

    @property
    def is_chart(self):
        return self.quad_metric is not None

    @property
    def n_triangles(self):
        return int(self.triangles.shape[0])

    # ------------------------------------------------------------------
    # combinatorics

    @cached_property
    def _edge_table(self):
        tri = self.triangles
        a = tri[:, NEXT]
        b = tri[:, PREV]
        lo = np.minimum(a, b).ravel()
        hi = np.maximum(a, b).ravel()
        keys = lo * np.int64(self.n_vertices) + hi
        uniq, inverse = np.unique(keys, return_inverse=True)
        edges = np.stack([uniq // self.n_vertices, uniq % self.n_vertices], axis=1)
        tri_edge = inverse.reshape(tri.shape)
        counts = np.bincount(inverse, minlength=len(uniq))
        # faces per edge, -1 where missing
        order = np.argsort(inverse, kind='stable')
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        faces = np.full((len(uniq), 2), -1, dtype=np.int64)
        flat_face = order // 3
        faces[:, 0] = flat_face[starts]
        two = counts >= 2
        faces[two, 1] = flat_face[starts[two] + 1]
        local = np.full((len(uniq), 2), -1, dtype=np.int64)
        flat_local = order % 3
        local[:, 0] = flat_local[starts]
        local[two, 1] = flat_local[starts[two] + 1]
        return edges, tri_edge, counts, faces, local

    @property
    def edges(self):
        '''(E, 2) sorted vertex pairs.'''
        return self._edge_table[0]

    @property
    def tri_edge(self):
        '''(F, 3) edge id of each local edge.'''
        return self._edge_table[1]

    @property
    def edge_face_count(self):
        return self._edge_table[2]

    @property
    def edge_faces(self):
        '''(E, 2) incident triangles, -1 for a missing second face.'''
        return self._edge_table[3]

    @property
    def edge_local(self):
        '''(E, 2) local index of the edge inside each incident triangle.'''
        return self._edge_table[4]

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    @cached_property
    def edge_lengths(self):
        '''(E,) metric edge lengths (mean over incident triangles).'''
        total = np.zeros(self.n_edges)
        np.add.at(total, self.tri_edge.ravel(), self.lengths.ravel())
        return total / self.edge_face_count

    @cached_property
    def used_vertices(self):
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        return used

    @property
    def chi(self):
        return int(np.count_nonzero(self.used_vertices)) - self.n_edges + self.n_triangles

    @cached_property
    def boundary_edges(self):
        return np.nonzero(self.edge_face_count == 1)[0]

    @cached_property
    def boundary_vertex_mask(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edges].ravel()] = True
        return mask

    @property
    def is_closed(self):
        return self.boundary_edges.size == 0

    @cached_property
    def pinched(self):
        '''True when some vertex has more than two incident boundary edges.'''
        if self.boundary_edges.size == 0:
            return False
        deg = np.bincount(self.edges[self.boundary_edges].ravel(), minlength=self.n_vertices)
        return bool(np.any(deg > 2))

    @cached_property
    def boundary_loops(self):
        '''
        Boundary edge-cycles as vertex sequences (first vertex not repeated).

        Successive boundary edges are found by rotating through the vertex
        fan, so loops stay separate at pinch vertices.
        '''
        edges = self.edges
        faces = self.edge_faces
        tri = self.triangles
        tri_edge = self.tri_edge
        count = self.edge_face_count
        visited = np.zeros(self.n_edges, dtype=bool)
        loops = []
        for start in self.boundary_edges:
            if visited[start]:
                continue
            loop = [int(edges[start, 0])]
            edge, vertex = int(start), int(edges[start, 1])
            face = int(faces[start, 0])
            visited[start] = True
            for _ in range(self.n_edges + 1):
                loop.append(vertex)
                # rotate around `vertex` until the next boundary edge
                while True:
                    lv = int(np.nonzero(tri[face] == vertex)[0][0])
                    k = int(np.nonzero(tri_edge[face] == edge)[0][0])
                    other = tri_edge[face, 3 - lv - k]
                    if count[other] == 1:
                        edge = int(other)
                        break
                    f0, f1 = faces[other]
                    face = int(f1 if f0 == face else f0)
                    edge = int(other)
                if edge == start:
                    break
                visited[edge] = True
                a, b = edges[edge]
                vertex = int(b if a == vertex else a)
                face = int(faces[edge, 0])
            loop.pop()
            loops.append(np.asarray(loop, dtype=np.int64))
        return loops

    @cached_property
    def face_adjacency(self):
        '''Sparse (F, F) adjacency across interior edges.'''
        interior = np.nonzero(self.edge_face_count == 2)[0]
        f = self.edge_faces[interior]
        n = self.n_triangles
        data = np.ones(2 * len(interior))
        return coo_matrix((data, (np.concatenate([f[:, 0], f[:, 1]]), np.concatenate([f[:, 1], f[:, 0]]))),
                          shape=(n, n)).tocsr()

    @cached_property
    def components(self):
        '''(number of components, component label per triangle).'''
        n, labels = connected_components(self.face_adjacency, directed=False)
        return int(n), labels

    @property
    def is_connected(self):
        return self.components[0] == 1

    @cached_property
    def sign_propagation(self):
        '''
        Face signs propagated along a spanning tree of the dual graph.

        Returns:
            (signs (F,), interior edge ids, bool mask of interior edges whose
            two faces agree under those signs)
        '''
        interior = np.nonzero(self.edge_face_count == 2)[0]
        tri = self.triangles
        f = self.edge_faces[interior]
        k = self.edge_local[interior]
        # +1 when the face traverses the edge as (lo, hi)
        d0 = np.where(tri[f[:, 0], NEXT[k[:, 0]]] == self.edges[interior, 0], 1, -1)
        d1 = np.where(tri[f[:, 1], NEXT[k[:, 1]]] == self.edges[interior, 0], 1, -1)
        # consistent orientation needs s0*d0 == -s1*d1; flip bit when d0 == d1
        flip = (d0 == d1).astype(np.int64)
        n = self.n_triangles
        adj = coo_matrix((flip + 1, (f[:, 0], f[:, 1])), shape=(n, n)).tocsr()
        adj = adj + adj.T
        bits = np.zeros(n, dtype=np.int64)
        seen = np.zeros(n, dtype=bool)
        for root in range(n):
            if seen[root]:
                continue
            order, pred = breadth_first_order(adj, root, directed=False, return_predecessors=True)
            pred = normalize_predecessors(pred)
            seen[order] = True
            step = np.zeros(n, dtype=np.int64)
            nodes = order[1:]
            step[nodes] = np.asarray(adj[pred[nodes], nodes]).ravel() - 1
            sub_pred = np.full(n, -1, dtype=np.int64)
            sub_pred[nodes] = pred[nodes]
            acc = accumulate_along_tree(sub_pred, step)
            bits[order] = acc[order] % 2
        signs = 1 - 2 * bits
        ok = signs[f[:, 0]] * d0 == -signs[f[:, 1]] * d1
        return signs, interior, ok

    @property
    def _orientation(self):
        signs, _, ok = self.sign_propagation
        return signs if np.all(ok) else None

    @property
    def orientable(self):
        return self._orientation is not None

    @property
    def face_signs(self):
        '''+1/-1 per triangle giving a consistent orientation (orientable surfaces only).'''
        return self._orientation

    # ------------------------------------------------------------------
    # metric quantities

    @cached_property
    def triangle_areas(self):
        if not self.is_chart:
            return heron_area(self.lengths)
        return chart_areas(self.uv, self.quad_metric)

    @property
    def area(self):
        return float(self.triangle_areas.sum())

    @cached_property
    def local_frames(self):
        '''
        Per-triangle 2D corner coordinates and a constant metric tensor.

        Discrete backend: the triangle laid out flat from its edge lengths
        with the identity metric. Chart backend: chart coordinates with the
        mean of the quadrature samples.
        '''
        if self.is_chart:
            return self.uv, self.quad_metric.mean(axis=1)
        a, b, c = self.lengths[:, 0], self.lengths[:, 1], self.lengths[:, 2]
        x = (b * b + c * c - a * a) / (2.0 * c)
        y = np.sqrt(np.maximum(b * b - x * x, 0.0))
        coords = np.zeros((self.n_triangles, 3, 2))
        coords[:, 1, 0] = c
        coords[:, 2, 0] = x
        coords[:, 2, 1] = y
        g = np.broadcast_to(np.eye(2), (self.n_triangles, 2, 2))
        return coords, g

    @cached_property
    def mean_edge_length(self):
        return float(self.edge_lengths.mean())

    @cached_property
    def max_edge_length(self):
        return float(self.edge_lengths.max())

    def centroid_values(self, vertex_values):
        '''Mean of a vertex field over each triangle.'''
        return np.asarray(vertex_values)[self.triangles].mean(axis=1)

    def total_curvature(self):
        if self.curvature is None:
            return None
        return float(np.dot(self.curvature, self.triangle_areas))

    def summary(self):
        return (f'{self.model}: V={int(self.used_vertices.sum())} E={self.n_edges} F={self.n_triangles} '
                f'chi={self.chi} area={self.area:.6g} loops={len(self.boundary_loops)} '
                f'orientable={self.orientable}')


def chart_areas(uv, quad_metric):
    '''Metric area per triangle: three-point midpoint rule for sqrt(det g).'''
    e1 = uv[:, 1] - uv[:, 0]
    e2 = uv[:, 2] - uv[:, 0]
    param_area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    g = quad_metric
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    return param_area * np.sqrt(np.maximum(det, 0.0)).mean(axis=1)


# ----------------------------------------------------------------------
# subsurfaces

@dataclass(frozen=True, eq=False)
class Subsurface:
    '''
    A set of triangles of a parent surface.

    Vertex-indexed data (ground states, boundary loops) use the local
    numbering of `surface`; `vertex_map` converts to parent ids.
    '''
    parent: MetricSurface
    triangle_ids: np.ndarray
    label: str = ''

    def __post_init__(self):
        ids = np.unique(np.asarray(self.triangle_ids, dtype=np.int64))
        ids.setflags(write=False)
        object.__setattr__(self, 'triangle_ids', ids)

    @cached_property
    def _local(self):
        parent = self.parent
        tri = parent.triangles[self.triangle_ids]
        vertex_map, local_tri = np.unique(tri.ravel(), return_inverse=True)
        local_tri = local_tri.reshape(tri.shape)

        def pick(arr, per_vertex=False):
            if arr is None:
                return None
            return arr[vertex_map] if per_vertex else arr[self.triangle_ids]

        surface = MetricSurface(
            triangles=local_tri,
            lengths=parent.lengths[self.triangle_ids],
            n_vertices=len(vertex_map),
            uv=pick(parent.uv),
            quad_metric=pick(parent.quad_metric),
            curvature=pick(parent.curvature),
            radial=pick(parent.radial, per_vertex=True),
            positions=pick(parent.positions, per_vertex=True),
            model=parent.model,
            model_data=parent.model_data,
            validate=False,
        )
        return surface, vertex_map

    @property
    def surface(self) -> MetricSurface:
        '''Standalone reindexed surface of the selected triangles.'''
        return self._local[0]

    def as_surface(self):
        return self._local

    @property
    def vertex_map(self):
        return self._local[1]

    @property
    def chi(self):
        return self.surface.chi

    @cached_property
    def boundary_loops(self):
        '''Boundary loops in parent vertex ids.'''
        return [self.vertex_map[loop] for loop in self.surface.boundary_loops]

    @property
    def orientable(self):
        return self.surface.orientable

    @property
    def is_connected(self):
        return self.surface.is_connected

    @cached_property
    def topo_class(self):
        s = self.surface
        return classify(s.chi, len(s.boundary_loops), s.orientable, s.is_connected, s.pinched)

    @property
    def area(self):
        return self.surface.area

    @cached_property
    def boundary_length(self):
        s = self.surface
        return float(s.edge_lengths[s.boundary_edges].sum())

    @property
    def is_closed(self):
        return self.surface.is_closed

    @property
    def interior_vertices(self):
        '''Local ids of vertices off the boundary.'''
        return np.nonzero(~self.surface.boundary_vertex_mask)[0]

    @property
    def boundary_vertices(self):
        return np.nonzero(self.surface.boundary_vertex_mask)[0]

    def contains_triangles(self, other):
        return np.all(np.isin(other.triangle_ids, self.triangle_ids))

    def describe(self):
        return (f'{self.label or "subsurface"}: {self.topo_class.value} chi={self.chi} '
                f'loops={len(self.boundary_loops)} area={self.area:.6g} |dF|={self.boundary_length:.6g}')


TrianglePredicate = Union[Callable[[int], bool], np.ndarray, Sequence[int]]


def selection_mask(S: MetricSurface, predicate: TrianglePredicate):
    if callable(predicate):
        return np.fromiter((bool(predicate(t)) for t in range(S.n_triangles)), dtype=bool, count=S.n_triangles)
    arr = np.asarray(predicate)
    if arr.dtype == bool:
        if arr.shape != (S.n_triangles,):
            raise EmptySelection('boolean selection must have one entry per triangle')
        return arr
    mask = np.zeros(S.n_triangles, dtype=bool)
    mask[arr.astype(np.int64)] = True
    return mask


def extract_subsurface(S: MetricSurface, predicate: TrianglePredicate, label=''):
    '''
    Select triangles of S.

    Args:
        S: parent surface
        predicate: callable triangle -> bool, a boolean mask, or triangle ids
        label: free-form name carried into reports

    Returns:
        Subsurface with its topological class computed (Other when the
        selection is not a disc, annulus or cross cap)
    '''
    mask = selection_mask(S, predicate)
    if not mask.any():
        raise EmptySelection('predicate selected no triangles')
    sub = Subsurface(S, np.nonzero(mask)[0], label=label)
    logger.debug(f'Subsurface: {sub.describe()}')
    return sub


def whole(S: MetricSurface, label='S'):
    return Subsurface(S, np.arange(S.n_triangles), label=label)


# ----------------------------------------------------------------------
# conformal change and exhaustions

def conformal_scale(S: MetricSurface, factor):
    '''
    The surface with metric f*g.

    Args:
        S: surface
        factor: (V,) positive vertex values, or a callable on S.positions

    Returns:
        MetricSurface whose edges are scaled by the per-edge mean of sqrt(f)
        and whose chart metric samples are multiplied by f at the quadrature
        points
    '''
    if callable(factor):
        if S.positions is None:
            raise NonPositiveFactor('callable factor needs vertex positions')
        factor = factor(S.positions)
    f = np.asarray(factor, dtype=float)
    if f.shape == ():
        f = np.full(S.n_vertices, float(f))
    if f.shape != (S.n_vertices,):
        raise NonPositiveFactor('factor must be a vertex function')
    if np.any(~np.isfinite(f)) or np.any(f[S.used_vertices] <= 0):
        raise NonPositiveFactor('conformal factor must be positive')
    root = np.sqrt(f)
    tri = S.triangles
    edge_scale = (root[tri[:, NEXT]] + root[tri[:, PREV]]) / 2.0
    quad_metric = None
    if S.is_chart:
        f_quad = (f[tri[:, NEXT]] + f[tri[:, PREV]]) / 2.0
        quad_metric = S.quad_metric * f_quad[..., None, None]
    curvature = None
    if S.curvature is not None:
        curvature = S.curvature / f[tri].mean(axis=1)
    return MetricSurface(
        triangles=S.triangles,
        lengths=S.lengths * edge_scale,
        n_vertices=S.n_vertices,
        uv=S.uv,
        quad_metric=quad_metric,
        curvature=curvature,
        radial=S.radial,
        positions=S.positions,
        boundary_turning=S.boundary_turning,
        model=S.model,
        model_data=S.model_data,
        expected_chi=S.expected_chi,
    )


@dataclass(frozen=True, eq=False)
class ExhaustionFamily:
    surface: MetricSurface
    radii: Tuple[float, ...]
    truncations: Tuple[Subsurface, ...]

    def complement(self, i, far=None):
        '''S minus K_i, optionally cut at radial value `far`.'''
        r = self.surface.centroid_values(self.surface.radial)
        mask = r > self.radii[i]
        if far is not None:
            mask &= r < far
        return extract_subsurface(self.surface, mask, label=f'S-K{i}')

    @property
    def radial_extent(self):
        return float(np.max(self.surface.radial))


def build_exhaustion(S: MetricSurface, radii):
    '''
    Nested truncations K_i = {r <= r_i} of a surface with a radial coordinate.

    Raises:
        ModelMismatch: S declares no radial coordinate
        NonIncreasingRadii: radii not strictly increasing
    '''
    if S.radial is None:
        raise ModelMismatch('surface has no radial coordinate for an exhaustion')
    radii = tuple(float(r) for r in radii)
    if len(radii) == 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise NonIncreasingRadii(f'radii must be strictly increasing: {radii}')
    r = S.centroid_values(S.radial)
    truncations = tuple(extract_subsurface(S, r <= ri, label=f'K{i}') for i, ri in enumerate(radii))
    return ExhaustionFamily(surface=S, radii=radii, truncations=truncations)


# ----------------------------------------------------------------------
# diagnostics and export

def gauss_bonnet_residual(S: MetricSurface):
    '''|sum K*area + sum boundary turning - 2 pi chi|.'''
    total = S.total_curvature()
    if total is None:
        raise ModelMismatch('surface carries no curvature field')
    return abs(total + sum(S.boundary_turning) - 2.0 * math.pi * S.chi)


def export_off(S: MetricSurface, path):
    '''Write the mesh in OFF format (chart or plane positions padded to 3D).'''
    if S.positions is None:
        raise ModelMismatch('surface has no vertex positions to export')
    pos = S.positions
    if pos.shape[1] == 2:
        pos = np.hstack([pos, np.zeros((pos.shape[0], 1))])
    with open(path, 'w') as f:
        f.write('OFF\n')
        f.write(f'{S.n_vertices} {S.n_triangles} {S.n_edges}\n')
        for x, y, z in pos:
            f.write(f'{x:.17g} {y:.17g} {z:.17g}\n')
        for a, b, c in S.triangles:
            f.write(f'3 {a} {b} {c}\n')


def export_edge_lengths(S: MetricSurface, path):
    '''Write the auxiliary edge-length table accompanying an OFF export.'''
    with open(path, 'w') as f:
        f.write('v0,v1,length\n')
        for (a, b), length in zip(S.edges, S.edge_lengths):
            f.write(f'{a},{b},{length:.17g}\n')
