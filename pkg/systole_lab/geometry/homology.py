'''
First homology by tree-cotree decomposition.

A spanning tree T of the vertex graph and a spanning tree of the dual
graph (faces plus one virtual node per component collecting the
boundary edges) avoiding T leave exactly rank H1 edges. Each leftover
edge defines an integer cocycle that is 1 on it, 0 on T, and is fixed on
the cotree by the face conditions. Evaluating these cochains along a
closed edge path gives its homology class.

Closed non-orientable surfaces are handled mod 2.
'''

import logging
from collections import deque
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from systole_lab.geometry.surface import NEXT, PREV, MetricSurface, normalize_predecessors
from systole_lab.utils.errors import NotClosed

logger = logging.getLogger(__name__)


class HomologyBasis:
    '''
    Cohomology basis of a MetricSurface.

    Attributes:
        surface: the surface
        cochains: (E, rank) integer values on edges oriented (lo, hi)
        modulus: None for integer classes, 2 on closed non-orientable surfaces
        orientation_cochain: (E,) 0/1 values; a closed path is one-sided
            exactly when its sum is odd
    '''

    def __init__(self, surface: MetricSurface):
        self.surface = surface
        self.modulus = 2 if (surface.is_closed and not surface.orientable) else None
        self.tree_edges = self._primal_tree()
        self.cotree_edges, self.cochains = self._cotree_cochains()
        logger.debug(f'HomologyBasis: rank={self.rank} modulus={self.modulus} for {surface.model}')

    @property
    def rank(self):
        return int(self.cochains.shape[1])

    # ------------------------------------------------------------------

    @cached_property
    def vertex_lookup(self):
        '''Sparse (V, V) matrix holding edge id + 1 for each mesh edge.'''
        S = self.surface
        e = S.edges
        ids = np.arange(S.n_edges) + 1
        return coo_matrix((np.concatenate([ids, ids]), (np.concatenate([e[:, 0], e[:, 1]]),
                                                        np.concatenate([e[:, 1], e[:, 0]]))),
                          shape=(S.n_vertices, S.n_vertices)).tocsr()

    def edge_ids(self, u, v):
        '''
        Edge ids and orientation signs of vertex pairs.

        Returns:
            (ids, signs): signs are +1 when u < v; ids are -1 for pairs that
            are not mesh edges
        '''
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        ids = np.asarray(self.vertex_lookup[u, v]).ravel().astype(np.int64) - 1
        signs = np.where(u < v, 1, -1)
        return ids, signs

    def _primal_tree(self):
        S = self.surface
        tree = np.zeros(S.n_edges, dtype=bool)
        n_comp, labels = connected_components(self.vertex_lookup, directed=False)
        used = S.used_vertices
        for c in range(n_comp):
            members = np.nonzero((labels == c) & used)[0]
            if members.size == 0:
                continue
            order, pred = breadth_first_order(self.vertex_lookup, members[0], directed=False,
                                              return_predecessors=True)
            pred = normalize_predecessors(pred)
            nodes = order[1:]
            ids, _ = self.edge_ids(pred[nodes], nodes)
            tree[ids] = True
        return tree

    def _cotree_cochains(self):
        S = self.surface
        F = S.n_triangles
        n_comp, comp = S.components
        # dual nodes: faces 0..F-1, then one boundary node per component
        neighbours = [[] for _ in range(F + n_comp)]
        faces = S.edge_faces
        for e in np.nonzero(~self.tree_edges)[0]:
            f0, f1 = faces[e]
            if f1 < 0:
                f1 = F + comp[f0]
            neighbours[f0].append((f1, e))
            neighbours[f1].append((f0, e))

        parent_edge = np.full(F + n_comp, -1, dtype=np.int64)
        order = []
        seen = np.zeros(F + n_comp, dtype=bool)
        roots = []
        for c in range(n_comp):
            has_boundary = bool(neighbours[F + c])
            roots.append(F + c if has_boundary else int(np.nonzero(comp == c)[0][0]))
        for root in roots:
            seen[root] = True
            queue = deque([root])
            while queue:
                node = queue.popleft()
                order.append(node)
                for other, e in neighbours[node]:
                    if not seen[other]:
                        seen[other] = True
                        parent_edge[other] = e
                        queue.append(other)

        cotree = np.zeros(S.n_edges, dtype=bool)
        cotree[parent_edge[parent_edge >= 0]] = True
        generators = np.nonzero(~self.tree_edges & ~cotree)[0]
        n_closed = sum(1 for r in roots if r < F)
        expected = S.n_edges - (np.count_nonzero(S.used_vertices) - n_comp) - F + n_closed
        if len(generators) != expected:
            logger.warning(f'HomologyBasis: {len(generators)} generators, expected {expected}')

        values = np.zeros((S.n_edges, len(generators)), dtype=np.int64)
        values[generators, np.arange(len(generators))] = 1

        tri = S.triangles
        tri_edge = S.tri_edge
        # sign of local edge k in face boundary order relative to (lo, hi)
        face_sign = np.where(tri[:, NEXT] < tri[:, PREV], 1, -1)
        for node in reversed(order):
            if node >= F:
                continue
            e = parent_edge[node]
            if e < 0:
                continue
            k = int(np.nonzero(tri_edge[node] == e)[0][0])
            others = [m for m in range(3) if m != k]
            total = face_sign[node, others[0]] * values[tri_edge[node, others[0]]] \
                + face_sign[node, others[1]] * values[tri_edge[node, others[1]]]
            values[e] = -face_sign[node, k] * total
        return cotree, values

    @cached_property
    def orientation_cochain(self):
        '''w1 as a 0/1 edge cochain from the orientation double cover.'''
        S = self.surface
        if S.orientable:
            return np.zeros(S.n_edges, dtype=np.int64)
        F = S.n_triangles
        signs, interior, ok = S.sign_propagation
        faces = S.edge_faces[interior]
        local = S.edge_local[interior]
        tri = S.triangles

        def corner(face, sheet, k):
            return (sheet * F + face) * 3 + k

        rows, cols = [], []
        flip = (~ok).astype(np.int64)
        for sheet in (0, 1):
            for end in (NEXT, PREV):
                vert = tri[faces[:, 0], end[local[:, 0]]]
                pos1 = np.argmax(tri[faces[:, 1]] == vert[:, None], axis=1)
                rows.append(corner(faces[:, 0], sheet, end[local[:, 0]]))
                cols.append(corner(faces[:, 1], sheet ^ flip, pos1))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        n = 6 * F
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, lifted = connected_components(graph, directed=False)

        # reference lift of each vertex: sheet 0 corner of its first face
        ref = np.full(S.n_vertices, -1, dtype=np.int64)
        flat = tri.ravel()
        first = np.unique(flat, return_index=True)
        ref[first[0]] = lifted[corner(first[1] // 3, 0, first[1] % 3)]

        e_face = S.edge_faces[:, 0]
        e_local = S.edge_local[:, 0]
        a = tri[e_face, NEXT[e_local]]
        b = tri[e_face, PREV[e_local]]
        sheet_a = (lifted[corner(e_face, 0, NEXT[e_local])] != ref[a]).astype(np.int64)
        sheet_b = (lifted[corner(e_face, 0, PREV[e_local])] != ref[b]).astype(np.int64)
        return sheet_a ^ sheet_b

    # ------------------------------------------------------------------

    def reduce(self, cls):
        cls = np.asarray(cls, dtype=np.int64)
        return cls % 2 if self.modulus == 2 else cls

    def is_essential(self, cls):
        '''True for nonzero classes (per row when given a 2D array).'''
        return np.any(self.reduce(cls) != 0, axis=-1)

    def path_edges(self, vertices, closed=True):
        vertices = np.asarray(vertices, dtype=np.int64)
        if closed:
            u, v = vertices, np.roll(vertices, -1)
        else:
            u, v = vertices[:-1], vertices[1:]
        ids, signs = self.edge_ids(u, v)
        if np.any(ids < 0):
            raise NotClosed('vertex sequence contains a step that is not a mesh edge')
        return ids, signs

    def path_class(self, vertices, closed=True):
        '''Homology class of a closed vertex path (consecutive vertices share a mesh edge).'''
        ids, signs = self.path_edges(vertices, closed)
        return self.reduce((signs[:, None] * self.cochains[ids]).sum(axis=0))

    def path_one_sided(self, vertices, closed=True):
        ids, _ = self.path_edges(vertices, closed)
        return bool(self.orientation_cochain[ids].sum() % 2)
