'''
Discrete lengths on surfaces: systoles, shortest loops in a class,
inradius, metric balls and collars, plus the exact oracles used to
cross-check them (lattice vectors and Fuchsian traces).
'''

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import Side
from systole_lab.geometry.graph import DistanceGraph
from systole_lab.geometry.homology import HomologyBasis
from systole_lab.geometry.surface import (
    MetricSurface,
    Subsurface,
    TopoClass,
    accumulate_along_tree,
    extract_subsurface,
    normalize_predecessors,
)
from systole_lab.utils.errors import (
    CapTooSmall,
    ModelMismatch,
    NoBoundary,
    NonSimpleCore,
    NotClosed,
    PositiveChi,
    WrongClass,
)

logger = logging.getLogger(__name__)


class CertificateKind(str, enum.Enum):
    HOMOLOGY_NONTRIVIAL = 'HomologyNontrivial'
    CONTRACTIBLE = 'Contractible'
    BOUNDARY_PARALLEL = 'BoundaryParallel'
    UNKNOWN = 'Unknown'


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    homology_class: Tuple[int, ...] = ()

    def to_dict(self):
        return {'kind': self.kind.value, 'class': list(self.homology_class)}


@dataclass(frozen=True, eq=False)
class LoopResult:
    '''
    Closed vertex path with its length and certificate.

    `vertices` are parent vertex ids with the closing vertex not repeated.
    `mesh_path` is the same loop with diagonal steps expanded to mesh edges.
    '''
    vertices: np.ndarray
    length: float
    certificate: Certificate
    one_sided: bool = False
    mesh_path: Optional[np.ndarray] = None
    basepoint: int = -1
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def side(self):
        return Side.ONE_SIDED if self.one_sided else Side.TWO_SIDED

    @property
    def essential(self):
        return self.certificate.kind is CertificateKind.HOMOLOGY_NONTRIVIAL

    def to_dict(self):
        return {
            'vertices': [int(v) for v in self.vertices],
            'length': float(self.length),
            'certificate': self.certificate.to_dict(),
            'side': self.side.value,
            'notes': list(self.notes),
        }


def _derived(S: MetricSurface, key, build):
    '''Structures computed once per surface and stored on it, so they are freed with it.'''
    cache = S.__dict__.setdefault('_derived', {})
    if key not in cache:
        cache[key] = build()
    return cache[key]


def homology_of(S: MetricSurface):
    return _derived(S, 'homology', lambda: HomologyBasis(S))


def distance_graph(S: MetricSurface, diagonals=True):
    return _derived(S, ('graph', bool(diagonals)), lambda: DistanceGraph.build(S, diagonals=diagonals))


def _systole_config():
    cfg = settings.section('systole')
    return int(cfg.get('max_basepoints', 400)), bool(cfg.get('diagonals', True))


def _basepoints(S: MetricSurface, max_basepoints):
    used = np.nonzero(S.used_vertices)[0]
    if max_basepoints is None or len(used) <= max_basepoints:
        return used
    picks = used[np.unique(np.linspace(0, len(used) - 1, max_basepoints).astype(np.int64))]
    return np.unique(np.concatenate([[used[0]], picks]))


def _oriented(graph, edges, heads):
    '''+1 where graph edge e is traversed u -> v ending at heads, else -1.'''
    return np.where(graph.v[edges] == heads, 1, -1)


def _loop_search(graph: DistanceGraph, classes, accept, sources):
    '''
    Shortest accepted loop through any source vertex.

    For each source the shortest-path tree gives tree classes H by pointer
    jumping; every graph edge (u, v) then closes the loop s -> u -> v -> s
    whose class is H[u] + c(u, v) - H[v].
    '''
    best = (np.inf, None)
    n = graph.surface.n_vertices
    for s in sources:
        dist, pred = graph.shortest_paths(int(s))
        nodes = np.nonzero(pred >= 0)[0]
        tree = graph.lookup(pred[nodes], nodes)
        step = np.zeros((n, classes.shape[1]), dtype=np.int64)
        step[nodes] = _oriented(graph, tree, nodes)[:, None] * classes[tree]
        H = accumulate_along_tree(pred, step)
        length = dist[graph.u] + graph.weight + dist[graph.v]
        cls = H[graph.u] + classes - H[graph.v]
        ok = accept(cls) & np.isfinite(length)
        if not ok.any():
            continue
        i = int(np.argmin(np.where(ok, length, np.inf)))
        if length[i] < best[0] - 1e-12:
            best = (float(length[i]), (int(s), i, pred))
    if best[1] is None:
        return None
    s, e, pred = best[1]
    return _reconstruct(graph, s, e, pred)


def _tree_path(graph, pred, target):
    '''Vertices and graph edges from the tree root down to target.'''
    vertices = [int(target)]
    while pred[vertices[-1]] >= 0:
        vertices.append(int(pred[vertices[-1]]))
    vertices.reverse()
    edges = graph.lookup(vertices[:-1], vertices[1:]) if len(vertices) > 1 else np.zeros(0, dtype=np.int64)
    return vertices, list(int(x) for x in edges)


def _reconstruct(graph, s, e, pred):
    up_v, up_e = _tree_path(graph, pred, graph.u[e])
    down_v, down_e = _tree_path(graph, pred, graph.v[e])
    vertices = up_v + down_v[::-1][:-1]
    edges = up_e + [e] + down_e[::-1]
    # drop backtracking spurs at the basepoint
    while len(vertices) > 2 and vertices[1] == vertices[-1] and edges[0] == edges[-1]:
        vertices = vertices[1:-1]
        edges = edges[1:-1]
    return vertices, edges, s


def _path_class(graph, classes, vertices, edges):
    heads = np.roll(np.asarray(vertices), -1)
    edges = np.asarray(edges, dtype=np.int64)
    return (_oriented(graph, edges, heads)[:, None] * classes[edges]).sum(axis=0)


def _loop_result(S, graph, basis, vertices, edges, basepoint, notes=()):
    length = float(graph.weight[np.asarray(edges, dtype=np.int64)].sum())
    mesh_path = graph.expand(vertices, edges)
    cls = basis.path_class(mesh_path)
    graph_cls = basis.reduce(_path_class(graph, graph.edge_classes(basis), vertices, edges))
    if not np.array_equal(cls, graph_cls):
        logger.warning('Geodesics: loop class disagrees between graph and mesh path')
        notes = tuple(notes) + ('class mismatch',)
    kind = CertificateKind.HOMOLOGY_NONTRIVIAL if basis.is_essential(cls) else CertificateKind.UNKNOWN
    return LoopResult(
        vertices=np.asarray(vertices, dtype=np.int64),
        length=length,
        certificate=Certificate(kind, tuple(int(c) for c in cls)),
        one_sided=basis.path_one_sided(mesh_path),
        mesh_path=mesh_path,
        basepoint=int(basepoint),
        notes=tuple(notes),
    )


def shortest_essential_loop(S: MetricSurface, max_basepoints=None, diagonals=None, one_sided=None):
    '''
    Shortest homologically nontrivial loop of S (boundary allowed).

    Args:
        S: surface
        max_basepoints: number of evenly spread basepoints (vertex 0 always included)
        diagonals: use across-edge diagonals in the distance graph
        one_sided: restrict to one-sided (True) or two-sided (False) loops

    Returns:
        LoopResult, or None when S has no essential loop
    '''
    cfg_basepoints, cfg_diagonals = _systole_config()
    max_basepoints = cfg_basepoints if max_basepoints is None else max_basepoints
    diagonals = cfg_diagonals if diagonals is None else diagonals
    basis = homology_of(S)
    if basis.rank == 0:
        return None
    graph = distance_graph(S, diagonals)
    classes = graph.edge_classes(basis)
    if one_sided is not None:
        classes = np.hstack([classes, graph.edge_one_sided(basis)[:, None]])

    def accept(cls):
        if one_sided is None:
            return basis.is_essential(cls)
        parity = cls[:, -1] % 2
        return basis.is_essential(cls[:, :-1]) & (parity == (1 if one_sided else 0))

    sources = _basepoints(S, max_basepoints)
    found = _loop_search(graph, classes, accept, sources)
    if found is None:
        return None
    vertices, edges, s = found
    loop = _loop_result(S, graph, basis, vertices, edges, s)
    logger.debug(f'Geodesics: shortest essential loop {loop.length:.6g} ({len(sources)} basepoints)')
    return loop


def systole_upper(S: MetricSurface, max_basepoints=None, diagonals=None):
    '''
    Shortest homologically nontrivial edge loop of a closed surface.

    This bounds the mesh-geodesic systole from above and converges to the
    smooth systole under refinement for the shipped generators.

    Raises:
        NotClosed: S has boundary
        PositiveChi: chi(S) > 0
    '''
    if not S.is_closed:
        raise NotClosed('systole_upper needs a closed surface')
    if S.chi > 0:
        raise PositiveChi(f'surface with chi = {S.chi} has no essential loop')
    loop = shortest_essential_loop(S, max_basepoints, diagonals)
    if loop is None:
        raise PositiveChi('no essential loop found')
    logger.info(f'Geodesics: systole upper bound {loop.length:.6g} on {S.model} ({loop.side.value})')
    return loop


# ----------------------------------------------------------------------
# oracles

def lattice_systole(a, b, bound=10):
    '''Brute-force min |m a + n b| over 0 < max(|m|, |n|) <= bound.'''
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = np.meshgrid(np.arange(-bound, bound + 1), np.arange(-bound, bound + 1))
    m, n = m.ravel(), n.ravel()
    keep = (m != 0) | (n != 0)
    vectors = np.outer(m[keep], a) + np.outer(n[keep], b)
    return float(np.min(np.linalg.norm(vectors, axis=1)))


def fuchsian_lengths(S: MetricSurface, cap):
    '''
    Translation lengths of reduced deck-group words up to length `cap`.

    Returns:
        sorted lengths 2 arccosh(|tr|/2) of the hyperbolic elements,
        deduplicated to 1e-9
    '''
    if S.model != 'hyperbolic_octagon' or 'generators' not in S.model_data:
        raise ModelMismatch(f'fuchsian_lengths needs a hyperbolic octagon surface, got {S.model}')
    cap = int(cap)
    if cap < 1:
        raise CapTooSmall(f'word length cap must be at least 1, got {cap}')
    gens = list(S.model_data['generators'])
    letters = gens + [np.linalg.inv(g) for g in gens]
    inverse = {i: (i + len(gens)) % len(letters) for i in range(len(letters))}

    traces = []
    frontier = [((i,), letters[i]) for i in range(len(letters))]
    for _ in range(cap):
        traces.extend(abs(np.trace(m).real) for _, m in frontier)
        frontier = [(word + (j,), m @ letters[j])
                    for word, m in frontier for j in range(len(letters)) if j != inverse[word[-1]]]
    lengths = sorted(2.0 * math.acosh(t / 2.0) for t in traces if t > 2.0 + 1e-9)
    if not lengths:
        raise CapTooSmall('no hyperbolic element up to the word length cap')
    unique = [lengths[0]]
    for x in lengths[1:]:
        if x - unique[-1] > 1e-9:
            unique.append(x)
    return unique


# ----------------------------------------------------------------------
# loops in a subsurface

def shortest_in_homotopy_class(F: Subsurface, certify=True):
    '''
    Shortest loop of F freely homotopic to its core (annulus or cross cap).

    F's own cohomology has rank one; the loop is the shortest path from
    sheet 0 to sheet 1 of the three-sheet lift cut open along that class,
    started from every vertex next to the cut.

    Returns:
        LoopResult in parent vertex ids
    '''
    if F.topo_class not in (TopoClass.ANNULUS, TopoClass.CROSS_CAP):
        raise WrongClass(f'expected an annulus or cross cap, got {F.topo_class.value}')
    surf, vmap = F.as_surface()
    basis = HomologyBasis(surf)
    if basis.rank != 1:
        raise WrongClass(f'core class is not unique (rank {basis.rank})')
    _, diagonals = _systole_config()
    graph = DistanceGraph.build(surf, diagonals=diagonals)
    rep = graph._pairs
    c = graph.edge_classes(basis)[rep, 0]
    u, v, w = graph.u[rep], graph.v[rep], graph.weight[rep]
    n = surf.n_vertices
    sheets = (-1, 0, 1)
    rows, cols, data, ids = [], [], [], []
    for s in sheets:
        t = s + c
        ok = (t >= -1) & (t <= 1)
        rows.append((s + 1) * n + u[ok])
        cols.append((t[ok] + 1) * n + v[ok])
        data.append(w[ok])
        ids.append(rep[ok])
    rows, cols, data, ids = (np.concatenate(x) for x in (rows, cols, data, ids))
    lifted = coo_matrix((np.concatenate([data, data]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                        shape=(3 * n, 3 * n)).tocsr()
    lifted_ids = coo_matrix((np.concatenate([ids, ids]) + 1, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                            shape=(3 * n, 3 * n)).tocsr()

    cut = np.unique(np.concatenate([u[c != 0], v[c != 0]]))
    dist, pred = dijkstra(lifted, directed=False, indices=n + cut, return_predecessors=True)
    pred = normalize_predecessors(pred)
    target = dist[np.arange(len(cut)), 2 * n + cut]
    i = int(np.argmin(target))
    if not np.isfinite(target[i]):
        raise WrongClass('no loop in the core class')

    node = 2 * n + cut[i]
    nodes = [node]
    while pred[i, nodes[-1]] >= 0:
        nodes.append(int(pred[i, nodes[-1]]))
    nodes.reverse()
    nodes = np.asarray(nodes)
    if np.any(nodes < n):
        logger.warning(f'Geodesics: core loop touches the outermost sheet in {F.label or "subsurface"}')
    edges = np.asarray(lifted_ids[nodes[:-1], nodes[1:]]).ravel().astype(np.int64) - 1
    local = nodes[:-1] % n

    mesh_path = graph.expand(local, edges)
    local_cls = basis.path_class(mesh_path)
    notes = ()
    if abs(int(local_cls[0])) != 1:
        logger.warning(f'Geodesics: core loop class {local_cls.tolist()} is not a generator')
        notes = ('core class mismatch',)
    parent_path = vmap[mesh_path]
    if certify:
        certificate = certify_loop(F.parent, parent_path)
    else:
        certificate = Certificate(CertificateKind.UNKNOWN, tuple(int(x) for x in local_cls))
    loop = LoopResult(
        vertices=vmap[local],
        length=float(graph.weight[edges].sum()),
        certificate=certificate,
        one_sided=basis.path_one_sided(mesh_path) if not surf.orientable else False,
        mesh_path=parent_path,
        basepoint=int(vmap[cut[i]]),
        notes=notes,
    )
    logger.debug(f'Geodesics: core loop of {F.label or "subsurface"} has length {loop.length:.6g}')
    return loop


def inradius(F: Subsurface):
    '''Max over vertices of the graph distance to the boundary of F.'''
    surf = F.surface
    boundary = F.boundary_vertices
    if boundary.size == 0:
        raise NoBoundary('inradius needs a subsurface with boundary')
    _, diagonals = _systole_config()
    graph = DistanceGraph.build(surf, diagonals=diagonals)
    d = graph.distance_from(boundary)
    d = d[surf.used_vertices]
    return float(np.max(d[np.isfinite(d)]))


# ----------------------------------------------------------------------
# balls and collars

def _centroid_offsets(S: MetricSurface):
    '''(F, 3) distance from each corner to the triangle centroid (2/3 of the median).'''
    L = S.lengths
    a = L
    b = L[:, [1, 2, 0]]
    c = L[:, [2, 0, 1]]
    median = 0.5 * np.sqrt(np.maximum(2.0 * b * b + 2.0 * c * c - a * a, 0.0))
    return 2.0 * median / 3.0


def triangle_distances(S: MetricSurface, vertex_distance):
    '''Barycentre distance per triangle from a vertex distance field.'''
    d = np.asarray(vertex_distance)[S.triangles] + _centroid_offsets(S)
    return d.min(axis=1)


def metric_ball(S: MetricSurface, center, r):
    '''
    Triangles whose barycentre lies within distance r of a vertex.

    Falls back to the vertex star when no barycentre is close enough.
    '''
    center = int(center)
    graph = distance_graph(S, _systole_config()[1])
    d = graph.distance_from([center], limit=r + 2.0 * S.max_edge_length)
    mask = triangle_distances(S, d) <= r
    if not mask.any():
        mask = np.any(S.triangles == center, axis=1)
    return extract_subsurface(S, mask, label=f'ball({center},{r:.6g})')


def collar(S: MetricSurface, core, half_width):
    '''
    Triangles within distance half_width of a simple closed core.

    The topological class is computed, not assumed.
    '''
    vertices = np.asarray(core.vertices if isinstance(core, LoopResult) else core, dtype=np.int64)
    if len(np.unique(vertices)) != len(vertices):
        raise NonSimpleCore('collar core visits a vertex twice')
    graph = distance_graph(S, _systole_config()[1])
    d = graph.distance_from(vertices, limit=half_width + 2.0 * S.max_edge_length)
    mask = triangle_distances(S, d) <= half_width
    return extract_subsurface(S, mask, label=f'collar({half_width:.6g})')


# ----------------------------------------------------------------------
# certificates

def cut_labels(S: MetricSurface, path):
    '''Triangle components after cutting S along the mesh edges of a closed path.'''
    basis = homology_of(S)
    ids, _ = basis.path_edges(path)
    cut = np.zeros(S.n_edges, dtype=bool)
    cut[ids] = True
    keep = (S.edge_face_count == 2) & ~cut
    f = S.edge_faces[keep]
    n = S.n_triangles
    adj = coo_matrix((np.ones(len(f)), (f[:, 0], f[:, 1])), shape=(n, n))
    return connected_components(adj, directed=False)


def bounds_disc(S: MetricSurface, path):
    '''True when cutting along a simple closed path splits off a disc.'''
    path = np.asarray(path, dtype=np.int64)
    if len(np.unique(path)) != len(path):
        return False
    n_comp, labels = cut_labels(S, path)
    if n_comp < 2:
        return False
    for c in range(n_comp):
        piece = Subsurface(S, np.nonzero(labels == c)[0])
        if piece.topo_class is TopoClass.DISC:
            return True
    return False


def certify_loop(S: MetricSurface, path):
    '''
    Certificate of a closed mesh path in S.

    BoundaryParallel when the class equals that of a boundary loop up to
    sign, HomologyNontrivial for other nonzero classes, Contractible when
    the path cuts off a disc, Unknown otherwise.
    '''
    basis = homology_of(S)
    cls = basis.path_class(path)
    key = tuple(int(x) for x in cls)
    if basis.is_essential(cls):
        for loop in S.boundary_loops:
            b = basis.path_class(loop)
            if np.array_equal(cls, b) or np.array_equal(cls, basis.reduce(-b)):
                return Certificate(CertificateKind.BOUNDARY_PARALLEL, key)
        return Certificate(CertificateKind.HOMOLOGY_NONTRIVIAL, key)
    if bounds_disc(S, path):
        return Certificate(CertificateKind.CONTRACTIBLE, key)
    return Certificate(CertificateKind.UNKNOWN, key)


def loop_is_two_sided(S: MetricSurface, path):
    return not homology_of(S).path_one_sided(path)


def loop_through(S: MetricSurface, vertices, certify=True):
    '''LoopResult for an explicit closed mesh path (consecutive vertices share an edge).'''
    vertices = np.asarray(vertices, dtype=np.int64)
    basis = homology_of(S)
    ids, _ = basis.path_edges(vertices)
    certificate = certify_loop(S, vertices) if certify else Certificate(CertificateKind.UNKNOWN)
    return LoopResult(
        vertices=vertices,
        length=float(S.edge_lengths[ids].sum()),
        certificate=certificate,
        one_sided=basis.path_one_sided(vertices),
        mesh_path=vertices,
    )
