'''
Surface generators.

Each generator returns a validated MetricSurface whose Euler
characteristic matches the declared topology:

- make_flat_torus: R^2 / lattice, discrete backend
- make_hyperbolic_octagon: regular octagon with opposite sides glued
  (genus 2, constant curvature -1), discrete backend
- make_warped_cylinder: [x0, x1] x S^1_C with metric dx^2 + j(x)^2 dy^2, chart backend
- make_hyperbolic_disc: geodesic disc in the Poincare model, chart backend
- make_flat_disc, make_klein_bottle_flat, make_round_sphere: test fixtures
'''

import logging
import math

import numpy as np

from systole_lab.geometry.surface import NEXT, PREV, MetricSurface
from systole_lab.utils.errors import DegenerateLattice, InvalidMesh, NonPositiveWarp

logger = logging.getLogger(__name__)

GAUSS_NODES = np.array([0.5 - math.sqrt(15.0) / 10.0, 0.5, 0.5 + math.sqrt(15.0) / 10.0])
GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0
FD_STEP = 1e-4


def _require_resolution(resolution, minimum):
    resolution = int(resolution)
    if resolution < minimum:
        raise InvalidMesh(f'resolution must be at least {minimum}, got {resolution}')
    return resolution


def _corner_lengths(corners):
    '''(F, 3, d) corner coordinates -> (F, 3) Euclidean opposite-edge lengths.'''
    return np.linalg.norm(corners[:, NEXT] - corners[:, PREV], axis=-1)


def chart_lengths(uv, metric):
    '''
    Metric lengths of straight chart segments by 3-point Gauss-Legendre.

    Args:
        uv: (F, 3, 2) chart corners
        metric: vectorized callable (..., 2) -> (..., 2, 2)
    '''
    p = uv[:, NEXT]
    d = uv[:, PREV] - p
    total = np.zeros(uv.shape[:2])
    for s, w in zip(GAUSS_NODES, GAUSS_WEIGHTS):
        g = metric(p + s * d)
        quad = np.einsum('fki,fkij,fkj->fk', d, g, d)
        total += w * np.sqrt(quad)
    return total


def chart_quad_metric(uv, metric):
    '''Metric samples at the midpoint of each local edge.'''
    mid = 0.5 * (uv[:, NEXT] + uv[:, PREV])
    return metric(mid)


# ----------------------------------------------------------------------
# flat tori and Klein bottles

def gauss_reduce(a, b):
    '''Lagrange-Gauss reduction: |a| <= |b| and |a.b| <= |a|^2 / 2.'''
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(200):
        if np.dot(b, b) < np.dot(a, a):
            a, b = b, a
        mu = round(float(np.dot(a, b) / np.dot(a, a)))
        if mu == 0:
            break
        b = b - mu * a
    return a, b


def make_flat_torus(a, b, resolution):
    '''
    Flat torus R^2 / (Z a + Z b) on a resolution x resolution grid.

    The basis is Gauss-reduced first so the shortest lattice vector runs
    along grid lines, and every cell is split along its shorter diagonal.
    '''
    n = _require_resolution(resolution, 4)
    a0 = np.asarray(a, dtype=float)
    b0 = np.asarray(b, dtype=float)
    cross = a0[0] * b0[1] - a0[1] * b0[0]
    if abs(cross) <= 1e-12 * np.linalg.norm(a0) * np.linalg.norm(b0):
        raise DegenerateLattice(f'lattice vectors {a0.tolist()} and {b0.tolist()} are collinear')
    a, b = gauss_reduce(a0, b0)

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing='ij')
    i, j = i.ravel(), j.ravel()

    def vid(ii, jj):
        return (ii % n) + n * (jj % n)

    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    P00, P10, P01, P11 = np.zeros(2), a / n, b / n, (a + b) / n
    if np.linalg.norm(a + b) <= np.linalg.norm(b - a):
        tris = [(v00, v10, v11), (v00, v11, v01)]
        shapes = [(P00, P10, P11), (P00, P11, P01)]
    else:
        tris = [(v00, v10, v01), (v10, v11, v01)]
        shapes = [(P00, P10, P01), (P10, P11, P01)]
    triangles = np.concatenate([np.stack(t, axis=1) for t in tris])
    lengths = np.concatenate([
        np.broadcast_to(_corner_lengths(np.stack(s)[None])[0], (n * n, 3)) for s in shapes])
    positions = np.outer(np.arange(n * n) % n, a) / n + np.outer(np.arange(n * n) // n, b) / n

    surface = MetricSurface(
        triangles=triangles,
        lengths=lengths,
        n_vertices=n * n,
        curvature=np.zeros(len(triangles)),
        positions=positions,
        model='flat_torus',
        model_data={'basis': (a, b), 'input_basis': (a0, b0), 'resolution': n},
        expected_chi=0,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


def make_klein_bottle_flat(width, height, resolution):
    '''
    Flat Klein bottle: [0, width] x [0, height] with the x direction periodic
    and the top edge glued to the bottom by x -> width - x.

    Every vertical grid column closes into a one-sided loop of length height.
    '''
    n = _require_resolution(resolution, 4)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing='ij')
    i, j = i.ravel(), j.ravel()

    def vid(ii, jj):
        ii = np.asarray(ii)
        jj = np.asarray(jj)
        wrap = jj >= n
        ii = np.where(wrap, n - ii, ii) % n
        return ii + n * np.where(wrap, jj - n, jj)

    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    hx, hy = width / n, height / n
    P = np.array([[0.0, 0.0], [hx, 0.0], [0.0, hy], [hx, hy]])
    triangles = np.concatenate([np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)])
    lengths = np.concatenate([
        np.broadcast_to(_corner_lengths(P[[0, 1, 3]][None])[0], (n * n, 3)),
        np.broadcast_to(_corner_lengths(P[[0, 3, 2]][None])[0], (n * n, 3)),
    ])
    positions = np.stack([(np.arange(n * n) % n) * hx, (np.arange(n * n) // n) * hy], axis=1)
    surface = MetricSurface(
        triangles=triangles,
        lengths=lengths,
        n_vertices=n * n,
        curvature=np.zeros(len(triangles)),
        positions=positions,
        model='flat_klein_bottle',
        model_data={'width': float(width), 'height': float(height),
                    'one_sided_core': np.arange(n) * n},
        expected_chi=0,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


# ----------------------------------------------------------------------
# the regular hyperbolic octagon

def klein_to_poincare(z):
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1, keepdims=True)
    return z / (1.0 + np.sqrt(np.maximum(1.0 - r2, 0.0)))


def poincare_distance(p, q):
    '''Hyperbolic distance in the Poincare disc, stable for short segments.'''
    num = np.linalg.norm(p - q, axis=-1)
    den = np.sqrt((1.0 - np.sum(p * p, axis=-1)) * (1.0 - np.sum(q * q, axis=-1)))
    return 2.0 * np.arcsinh(num / den)


def translation_matrix(angle, distance):
    '''SU(1,1) translation by `distance` along the diameter at `angle`.'''
    c, s = math.cosh(distance / 2.0), math.sinh(distance / 2.0)
    e = complex(math.cos(angle), math.sin(angle))
    return np.array([[c, e * s], [e.conjugate() * s, c]], dtype=complex)


def octagon_geometry():
    '''Circumradius and inradius (hyperbolic) of the regular octagon with angles pi/4.'''
    cot = 1.0 / math.tan(math.pi / 8.0)
    r_vertex = math.acosh(cot * cot)
    r_mid = math.acosh(cot)
    return r_vertex, r_mid


def make_hyperbolic_octagon(resolution):
    '''
    Genus-2 surface of curvature -1: the regular octagon with interior
    angles pi/4 and side k glued to side k+4.

    The octagon is drawn in the Klein model (geodesics are chords) as a fan
    of eight triangles around the centre, each subdivided barycentrically
    into resolution^2 pieces. Vertex 0 is the octagon centre. Side k+4 at
    parameter t is glued to side k at 1 - t by the hyperbolic translation
    through the centre, which also identifies all eight corners.

    model_data['generators'] holds the four SU(1,1) side pairings.
    '''
    n = _require_resolution(resolution, 2)
    r_vertex, r_mid = octagon_geometry()
    rho = math.tanh(r_vertex)
    angles = np.arange(9) * math.pi / 4.0 - math.pi / 8.0
    corners = rho * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    index = {}
    coords = []

    def vertex(key, point):
        if key not in index:
            index[key] = len(coords)
            coords.append(point)
        return index[key]

    vertex(('centre',), np.zeros(2))
    triangles = []
    corner_xy = []
    for k in range(8):
        pk, pk1 = corners[k], corners[k + 1]
        ids = {}
        pts = {}
        for i in range(n + 1):
            for j in range(n + 1 - i):
                point = (i * pk + j * pk1) / n
                if i == 0 and j == 0:
                    key = ('centre',)
                elif i + j == n and (i == n or j == n):
                    key = ('corner',)
                elif i + j == n:
                    key = ('side', k, j) if k < 4 else ('side', k - 4, n - j)
                elif j == 0:
                    key = ('spoke', k, i)
                elif i == 0:
                    key = ('spoke', (k + 1) % 8, j)
                else:
                    key = ('inner', k, i, j)
                ids[i, j] = vertex(key, point)
                pts[i, j] = point
        for i in range(n):
            for j in range(n - i):
                up = ((i, j), (i + 1, j), (i, j + 1))
                triangles.append([ids[c] for c in up])
                corner_xy.append([pts[c] for c in up])
                if i + j <= n - 2:
                    down = ((i + 1, j), (i + 1, j + 1), (i, j + 1))
                    triangles.append([ids[c] for c in down])
                    corner_xy.append([pts[c] for c in down])

    corner_xy = klein_to_poincare(np.asarray(corner_xy))
    lengths = poincare_distance(corner_xy[:, NEXT], corner_xy[:, PREV])
    generators = [translation_matrix(k * math.pi / 4.0, 2.0 * r_mid) for k in range(4)]
    surface = MetricSurface(
        triangles=np.asarray(triangles),
        lengths=lengths,
        n_vertices=len(coords),
        curvature=np.full(len(triangles), -1.0),
        positions=klein_to_poincare(np.asarray(coords)),
        model='hyperbolic_octagon',
        model_data={'generators': generators, 'centre_vertex': 0,
                    'systole': 2.0 * math.acosh(1.0 + math.sqrt(2.0))},
        expected_chi=-2,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


# ----------------------------------------------------------------------
# warped cylinders

def _warp_functions(warp):
    '''(j, j', curvature) callables for a WarpProfile, a callable or a constant.'''
    if np.isscalar(warp):
        value = float(warp)
        return (lambda x: np.full_like(np.asarray(x, dtype=float), value),
                lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    j = warp
    if hasattr(warp, 'derivative'):
        dj = warp.derivative
    else:
        def dj(x):
            x = np.asarray(x, dtype=float)
            return (j(x + FD_STEP) - j(x - FD_STEP)) / (2.0 * FD_STEP)
    if hasattr(warp, 'curvature'):
        kappa = warp.curvature
    else:
        def kappa(x):
            x = np.asarray(x, dtype=float)
            d2 = (j(x + FD_STEP) - 2.0 * j(x) + j(x - FD_STEP)) / FD_STEP ** 2
            return -d2 / j(x)
    return j, dj, kappa


def make_warped_cylinder(warp, x_range, circumference, resolution, x_cells=None, radial='x'):
    '''
    [x0, x1] x (R / C Z) with metric dx^2 + j(x)^2 dy^2.

    Args:
        warp: WarpProfile, vectorized callable or positive constant
        x_range: (x0, x1)
        circumference (float): period C of the y coordinate
        resolution (int): cells around the circle
        x_cells (int): cells along x, default keeps cells roughly square in the chart
        radial (str): 'x' for x - x0, 'abs' for |x|, None for no radial coordinate

    Returns:
        MetricSurface with two boundary loops (x = x0 and x = x1)
    '''
    ny = _require_resolution(resolution, 3)
    x0, x1 = float(x_range[0]), float(x_range[1])
    if not x1 > x0:
        raise InvalidMesh(f'empty x range [{x0}, {x1}]')
    C = float(circumference)
    nx = int(x_cells) if x_cells else max(4, math.ceil(ny * (x1 - x0) / C))
    j, dj, kappa = _warp_functions(warp)

    sample = np.linspace(x0, x1, max(4 * nx + 1, 257))
    values = np.asarray(j(sample), dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise NonPositiveWarp('warping function must be positive on the x range')

    hx, hy = (x1 - x0) / nx, C / ny
    i, k = np.meshgrid(np.arange(nx), np.arange(ny), indexing='ij')
    i, k = i.ravel(), k.ravel()

    def vid(ii, kk):
        return ii * ny + (kk % ny)

    v00, v10, v01, v11 = vid(i, k), vid(i + 1, k), vid(i, k + 1), vid(i + 1, k + 1)
    u0, u1 = x0 + i * hx, x0 + (i + 1) * hx
    w0, w1 = k * hy, (k + 1) * hy
    c00 = np.stack([u0, w0], axis=1)
    c10 = np.stack([u1, w0], axis=1)
    c01 = np.stack([u0, w1], axis=1)
    c11 = np.stack([u1, w1], axis=1)
    triangles = np.concatenate([np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)])
    uv = np.concatenate([np.stack([c00, c10, c11], axis=1), np.stack([c00, c11, c01], axis=1)])

    def metric(p):
        g = np.zeros(p.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.asarray(j(p[..., 0]), dtype=float) ** 2
        return g

    n_vertices = (nx + 1) * ny
    xs = x0 + (np.arange(n_vertices) // ny) * hx
    ys = (np.arange(n_vertices) % ny) * hy
    if radial == 'x':
        radial_values = xs - x0
    elif radial == 'abs':
        radial_values = np.abs(xs)
    else:
        radial_values = None

    centroid_x = uv[..., 0].mean(axis=1)
    turning = (-C * float(dj(np.asarray(x0))), C * float(dj(np.asarray(x1))))
    surface = MetricSurface(
        triangles=triangles,
        lengths=chart_lengths(uv, metric),
        n_vertices=n_vertices,
        uv=uv,
        quad_metric=chart_quad_metric(uv, metric),
        curvature=np.asarray(kappa(centroid_x), dtype=float),
        radial=radial_values,
        positions=np.stack([xs, ys], axis=1),
        boundary_turning=turning,
        model='warped_cylinder',
        model_data={'x_range': (x0, x1), 'circumference': C, 'x_cells': nx, 'y_cells': ny},
        expected_chi=0,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


# ----------------------------------------------------------------------
# discs and spheres

def ring_mesh(counts):
    '''
    Concentric ring triangulation: a centre vertex followed by rings of
    counts[i] equally spaced points.

    Returns:
        (ring index per vertex, angle per vertex, (F, 3) triangles)
    '''
    ring = [0]
    angle = [0.0]
    starts = []
    for r, m in enumerate(counts, start=1):
        starts.append(len(ring))
        ring.extend([r] * m)
        angle.extend((2.0 * math.pi * np.arange(m) / m).tolist())
    triangles = []
    m = counts[0]
    for q in range(m):
        triangles.append((0, starts[0] + q, starts[0] + (q + 1) % m))
    for r in range(len(counts) - 1):
        ma, mb = counts[r], counts[r + 1]
        sa, sb = starts[r], starts[r + 1]
        a = b = 0
        while a < ma or b < mb:
            # advance whichever ring has the smaller next angle
            next_a = (a + 1) / ma
            next_b = (b + 1) / mb
            if b < mb and (a >= ma or next_b <= next_a):
                triangles.append((sa + a % ma, sb + b % mb, sb + (b + 1) % mb))
                b += 1
            else:
                triangles.append((sa + a % ma, sb + b % mb, sa + (a + 1) % ma))
                a += 1
    return np.asarray(ring), np.asarray(angle), np.asarray(triangles, dtype=np.int64)


def make_hyperbolic_disc(radius, resolution):
    '''
    Geodesic disc of hyperbolic radius R, Poincare chart with metric
    4 |dz|^2 / (1 - |z|^2)^2 and rings at uniform hyperbolic radii.
    '''
    n = _require_resolution(resolution, 2)
    R = float(radius)
    if not R > 0:
        raise InvalidMesh(f'radius must be positive, got {R}')
    ring, angle, triangles = ring_mesh([6 * i for i in range(1, n + 1)])
    r_hyp = R * ring / n
    rho = np.tanh(r_hyp / 2.0)
    z = np.stack([rho * np.cos(angle), rho * np.sin(angle)], axis=1)
    uv = z[triangles]

    def metric(p):
        scale = (2.0 / (1.0 - np.sum(p * p, axis=-1))) ** 2
        return scale[..., None, None] * np.eye(2)

    surface = MetricSurface(
        triangles=triangles,
        lengths=chart_lengths(uv, metric),
        n_vertices=len(ring),
        uv=uv,
        quad_metric=chart_quad_metric(uv, metric),
        curvature=np.full(len(triangles), -1.0),
        radial=r_hyp,
        positions=z,
        boundary_turning=(2.0 * math.pi * math.cosh(R),),
        model='hyperbolic_disc',
        model_data={'radius': R},
        expected_chi=1,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


def make_flat_disc(radius, resolution):
    '''Euclidean disc of the given radius (inscribed polygon), discrete backend.'''
    n = _require_resolution(resolution, 2)
    ring, angle, triangles = ring_mesh([6 * i for i in range(1, n + 1)])
    r = float(radius) * ring / n
    xy = np.stack([r * np.cos(angle), r * np.sin(angle)], axis=1)
    surface = MetricSurface(
        triangles=triangles,
        lengths=_corner_lengths(xy[triangles]),
        n_vertices=len(ring),
        curvature=np.zeros(len(triangles)),
        radial=r,
        positions=xy,
        boundary_turning=(2.0 * math.pi,),
        model='flat_disc',
        model_data={'radius': float(radius)},
        expected_chi=1,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface


def _icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1]], dtype=float)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return verts / np.linalg.norm(verts, axis=1, keepdims=True), faces


def make_round_sphere(radius, resolution):
    '''Subdivided icosahedron with geodesic edge lengths on the sphere of the given radius.'''
    n = _require_resolution(resolution, 1)
    verts, faces = _icosahedron()
    index = {}
    points = []

    def vertex(p):
        p = p / np.linalg.norm(p)
        key = tuple(np.round(p, 9))
        if key not in index:
            index[key] = len(points)
            points.append(p)
        return index[key]

    triangles = []
    for a, b, c in faces:
        A, B, Cc = verts[a], verts[b], verts[c]
        ids = {}
        for i in range(n + 1):
            for j in range(n + 1 - i):
                ids[i, j] = vertex(A + (B - A) * i / n + (Cc - A) * j / n)
        for i in range(n):
            for j in range(n - i):
                triangles.append((ids[i, j], ids[i + 1, j], ids[i, j + 1]))
                if i + j <= n - 2:
                    triangles.append((ids[i + 1, j], ids[i + 1, j + 1], ids[i, j + 1]))
    points = np.asarray(points)
    triangles = np.asarray(triangles, dtype=np.int64)
    corners = points[triangles]
    cosines = np.clip(np.sum(corners[:, NEXT] * corners[:, PREV], axis=-1), -1.0, 1.0)
    R = float(radius)
    surface = MetricSurface(
        triangles=triangles,
        lengths=R * np.arccos(cosines),
        n_vertices=len(points),
        curvature=np.full(len(triangles), 1.0 / R ** 2),
        positions=R * points,
        model='round_sphere',
        model_data={'radius': R},
        expected_chi=2,
    )
    logger.info(f'Generators: {surface.summary()}')
    return surface
