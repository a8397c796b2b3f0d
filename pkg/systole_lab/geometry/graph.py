'''
Weighted vertex graph used for shortest paths on a MetricSurface.

Mesh edges carry their metric length. Optionally every interior edge adds
the diagonal joining the two opposite corners of its triangle pair,
measured in the unfolded quadrilateral when that quadrilateral is convex;
this removes most of the zig-zag excess of pure edge paths.
'''

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from systole_lab.geometry.surface import NEXT, PREV, MetricSurface, normalize_predecessors

logger = logging.getLogger(__name__)

CONVEXITY_MARGIN = 1e-9


def unfold_diagonals(S: MetricSurface):
    '''
    Opposite-corner diagonals across interior edges.

    Returns:
        dict of arrays: p, q (opposite vertices), via (shared edge endpoint
        used as the homotopic detour), length
    '''
    interior = np.nonzero(S.edge_face_count == 2)[0]
    f = S.edge_faces[interior]
    k = S.edge_local[interior]
    tri = S.triangles
    L = S.lengths
    a = tri[f[:, 0], NEXT[k[:, 0]]]
    b = tri[f[:, 0], PREV[k[:, 0]]]
    p = tri[f[:, 0], k[:, 0]]
    q = tri[f[:, 1], k[:, 1]]
    c = L[f[:, 0], k[:, 0]]

    def side(face, local, target):
        # length of the edge in `face` joining its corner `local` to vertex `target`
        pos = np.argmax(tri[face] == target[:, None], axis=1)
        opposite = 3 - local - pos
        return L[face, opposite]

    pa = side(f[:, 0], k[:, 0], a)
    pb = side(f[:, 0], k[:, 0], b)
    qa = side(f[:, 1], k[:, 1], a)
    qb = side(f[:, 1], k[:, 1], b)

    xp = (pa ** 2 + c ** 2 - pb ** 2) / (2.0 * c)
    yp = np.sqrt(np.maximum(pa ** 2 - xp ** 2, 0.0))
    xq = (qa ** 2 + c ** 2 - qb ** 2) / (2.0 * c)
    yq = np.sqrt(np.maximum(qa ** 2 - xq ** 2, 0.0))
    height = yp + yq
    with np.errstate(divide='ignore', invalid='ignore'):
        cross = xp + (xq - xp) * yp / height
    convex = (height > 0) & (cross > CONVEXITY_MARGIN * c) & (cross < (1.0 - CONVEXITY_MARGIN) * c) & (p != q)
    length = np.sqrt((xq - xp) ** 2 + height ** 2)
    return {'p': p[convex], 'q': q[convex], 'via': a[convex], 'length': length[convex]}


@dataclass(eq=False)
class DistanceGraph:
    '''
    Graph on the vertices of S.

    Attributes:
        u, v, weight: (M,) directed representation of each graph edge
        mesh_edge: (M,) mesh edge id, -1 for diagonals
        via: (M,) detour vertex of a diagonal (u -> via -> v), -1 for mesh edges
    '''
    surface: MetricSurface
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    mesh_edge: np.ndarray
    via: np.ndarray

    @classmethod
    def build(cls, S: MetricSurface, diagonals=True):
        edges = S.edges
        u = [edges[:, 0]]
        v = [edges[:, 1]]
        w = [S.edge_lengths]
        mesh = [np.arange(S.n_edges)]
        via = [np.full(S.n_edges, -1)]
        if diagonals:
            d = unfold_diagonals(S)
            u.append(d['p'])
            v.append(d['q'])
            w.append(d['length'])
            mesh.append(np.full(len(d['p']), -1))
            via.append(d['via'])
        graph = cls(S, np.concatenate(u).astype(np.int64), np.concatenate(v).astype(np.int64),
                    np.concatenate(w), np.concatenate(mesh).astype(np.int64),
                    np.concatenate(via).astype(np.int64))
        logger.debug(f'DistanceGraph: {S.n_edges} mesh edges, {graph.size - S.n_edges} diagonals')
        return graph

    @property
    def size(self):
        return int(self.u.shape[0])

    @cached_property
    def _pairs(self):
        '''Shortest representative per unordered vertex pair.'''
        n = self.surface.n_vertices
        lo = np.minimum(self.u, self.v)
        hi = np.maximum(self.u, self.v)
        order = np.lexsort((self.weight, hi, lo))
        keys = lo[order] * np.int64(n) + hi[order]
        first = np.concatenate([[True], keys[1:] != keys[:-1]])
        rep = order[first]
        return rep

    @cached_property
    def matrix(self):
        '''Symmetric CSR weight matrix (shortest parallel edge kept).'''
        rep = self._pairs
        n = self.surface.n_vertices
        rows = np.concatenate([self.u[rep], self.v[rep]])
        cols = np.concatenate([self.v[rep], self.u[rep]])
        data = np.concatenate([self.weight[rep], self.weight[rep]])
        return coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    @cached_property
    def edge_index(self):
        '''Symmetric CSR matrix holding representative edge index + 1.'''
        rep = self._pairs
        n = self.surface.n_vertices
        ids = rep + 1
        rows = np.concatenate([self.u[rep], self.v[rep]])
        cols = np.concatenate([self.v[rep], self.u[rep]])
        return coo_matrix((np.concatenate([ids, ids]), (rows, cols)), shape=(n, n)).tocsr()

    def lookup(self, a, b):
        '''Representative graph edge index for vertex pairs (-1 if none).'''
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return np.asarray(self.edge_index[a, b]).ravel().astype(np.int64) - 1

    def shortest_paths(self, sources, limit=np.inf):
        '''Distances and predecessors (-1 at sources and unreachable vertices).'''
        dist, pred = dijkstra(self.matrix, directed=False, indices=sources,
                              return_predecessors=True, limit=limit)
        return dist, normalize_predecessors(pred)

    def distance_from(self, sources, limit=np.inf):
        '''Distance to the nearest source vertex.'''
        return dijkstra(self.matrix, directed=False, indices=np.atleast_1d(sources),
                        min_only=True, limit=limit)

    def edge_classes(self, basis):
        '''(M, rank) class of each graph edge traversed u -> v, diagonals via their detour.'''
        mesh = self.mesh_edge >= 0
        out = np.zeros((self.size, basis.rank), dtype=np.int64)
        signs = np.where(self.u < self.v, 1, -1)
        out[mesh] = signs[mesh, None] * basis.cochains[self.mesh_edge[mesh]]
        diag = np.nonzero(~mesh)[0]
        if diag.size:
            ids1, s1 = basis.edge_ids(self.u[diag], self.via[diag])
            ids2, s2 = basis.edge_ids(self.via[diag], self.v[diag])
            out[diag] = s1[:, None] * basis.cochains[ids1] + s2[:, None] * basis.cochains[ids2]
        return out

    def edge_one_sided(self, basis):
        '''(M,) 0/1 orientation character of each graph edge.'''
        w = basis.orientation_cochain
        out = np.zeros(self.size, dtype=np.int64)
        mesh = self.mesh_edge >= 0
        out[mesh] = w[self.mesh_edge[mesh]]
        diag = np.nonzero(~mesh)[0]
        if diag.size:
            ids1, _ = basis.edge_ids(self.u[diag], self.via[diag])
            ids2, _ = basis.edge_ids(self.via[diag], self.v[diag])
            out[diag] = (w[ids1] + w[ids2]) % 2
        return out

    def expand(self, vertices, edges=None, closed=True):
        '''
        Replace diagonal steps of a vertex path by their two-edge mesh detour.

        Args:
            vertices: vertex sequence
            edges: graph edge index of each step, looked up by vertex pair when omitted
            closed: the last vertex steps back to the first
        '''
        vertices = list(int(x) for x in vertices)
        if closed:
            pairs = list(zip(vertices, vertices[1:] + vertices[:1]))
        else:
            pairs = list(zip(vertices[:-1], vertices[1:]))
        if edges is None:
            edges = self.lookup([a for a, _ in pairs], [b for _, b in pairs])
        out = [vertices[0]]
        for (a, b), e in zip(pairs, edges):
            e = int(e)
            if e >= 0 and self.mesh_edge[e] < 0:
                out.append(int(self.via[e]))
            out.append(b)
        if closed:
            out.pop()
        return np.asarray(out, dtype=np.int64)


def build_graph(S: MetricSurface, diagonals: Optional[bool] = True):
    return DistanceGraph.build(S, diagonals=diagonals)
