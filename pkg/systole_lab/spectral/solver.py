'''
First Dirichlet eigenvalue and ground state by inverse iteration.

The interior stiffness block is Jacobi scaled and factorized once at
shift 0; each step solves against the mass-weighted iterate and updates
the Rayleigh quotient. Closed regions return 0 with the constant vector.
'''

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from systole_lab.config import settings
from systole_lab.geometry.surface import Subsurface
from systole_lab.spectral.fem import Assembly, Region, assemble, local_matrices, local_surface
from systole_lab.utils.errors import DisjointRegion, EmptyInterior, SolverDivergence, ZeroVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Extrapolation:
    value: float
    error_bar: float
    raw: Tuple[float, ...]
    resolutions: Tuple[int, ...] = ()
    monotone: bool = True


@dataclass(frozen=True, eq=False)
class SpectralResult:
    '''
    Attributes:
        lambda0: first Dirichlet eigenvalue (0 for closed regions)
        ground_state: local vertex vector, zero on the boundary, phi^T M phi = 1
        rayleigh: Rayleigh quotient of ground_state
        mesh_h: longest edge of the region
        vertex_map: local -> parent vertex ids
    '''
    lambda0: float
    ground_state: np.ndarray
    rayleigh: float
    mesh_h: float
    vertex_map: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    positive: bool = True
    label: str = ''
    extrapolated: Optional[Extrapolation] = None

    @property
    def value(self):
        '''Extrapolated value when available, else the raw eigenvalue.'''
        return self.extrapolated.value if self.extrapolated else self.lambda0

    @property
    def error_bar(self):
        return self.extrapolated.error_bar if self.extrapolated else abs(self.rayleigh - self.lambda0)

    def to_dict(self):
        out = {
            'label': self.label,
            'lambda0': self.lambda0,
            'rayleigh': self.rayleigh,
            'mesh_h': self.mesh_h,
            'iterations': self.iterations,
            'residual': self.residual,
            'positive': self.positive,
        }
        if self.extrapolated:
            out['extrapolated'] = {
                'value': self.extrapolated.value,
                'error_bar': self.extrapolated.error_bar,
                'raw': list(self.extrapolated.raw),
                'resolutions': list(self.extrapolated.resolutions),
                'monotone': self.extrapolated.monotone,
            }
        return out


def _solver_config(tol, max_iter):
    cfg = settings.section('solver')
    tol = float(cfg.get('tol', 1e-9)) if tol is None else float(tol)
    max_iter = int(cfg.get('max_iter', 2000)) if max_iter is None else int(max_iter)
    return tol, max_iter


def _label(F):
    return getattr(F, 'label', '') or getattr(F, 'model', '')


def _closed_result(asm: Assembly, label):
    phi = np.zeros(asm.surface.n_vertices)
    phi[asm.interior] = 1.0
    phi /= math.sqrt(float(phi @ (asm.full_mass @ phi)))
    return SpectralResult(0.0, phi, 0.0, asm.surface.max_edge_length, asm.vertex_map, label=label)


def inverse_iteration(K, M, tol, max_iter):
    '''
    Smallest eigenpair of K x = lambda M x for SPD K.

    Returns:
        (lambda, x, iterations, residual) with x^T M x = 1
    '''
    d = 1.0 / np.sqrt(K.diagonal())
    D = sparse.diags(d)
    Ks = (D @ K @ D).tocsc()
    Ms = (D @ M @ D).tocsc()
    lu = splu(Ks)
    y = np.ones(K.shape[0])
    y /= math.sqrt(float(y @ (Ms @ y)))
    lam = float(y @ (Ks @ y))
    residual = math.inf
    for it in range(1, max_iter + 1):
        z = lu.solve(Ms @ y)
        y = z / math.sqrt(float(z @ (Ms @ z)))
        lam = float(y @ (Ks @ y))
        x = d * y
        Mx = M @ x
        residual = float(np.linalg.norm(K @ x - lam * Mx) / np.linalg.norm(Mx))
        if residual <= tol * max(1.0, lam):
            return lam, x, it, residual
    raise SolverDivergence(f'inverse iteration did not reach {tol:g} in {max_iter} steps (residual {residual:.3g})')


def lambda0(F: Region, tol=None, max_iter=None):
    '''
    First Dirichlet eigenvalue of a region.

    Raises:
        EmptyInterior: the region has no interior vertex
        SolverDivergence: the iteration cap was hit
    '''
    tol, max_iter = _solver_config(tol, max_iter)
    asm = assemble(F)
    label = _label(F)
    if asm.closed:
        return _closed_result(asm, label)
    if asm.interior.size == 0:
        raise EmptyInterior(f'{label or "region"} has no interior vertices')

    lam, x, iterations, residual = inverse_iteration(asm.stiffness, asm.mass, tol, max_iter)
    if x.sum() < 0:
        x = -x
    positive = bool(np.all(x > 0))
    if not positive:
        logger.warning(f'Solver: ground state of {label or "region"} has {int(np.sum(x <= 0))} '
                       f'non-positive interior entries')
    x = x / math.sqrt(float(x @ (asm.mass @ x)))
    phi = asm.extend(x)
    rq = float(x @ (asm.stiffness @ x))
    result = SpectralResult(
        lambda0=lam,
        ground_state=phi,
        rayleigh=rq,
        mesh_h=asm.surface.max_edge_length,
        vertex_map=asm.vertex_map,
        iterations=iterations,
        residual=residual,
        positive=positive,
        label=label,
    )
    logger.debug(f'Solver: {label or "region"} lambda0={lam:.10g} after {iterations} steps, '
                 f'{asm.interior.size} unknowns')
    return result


def eigenpairs(S: Region, k, tol=None):
    '''
    The k+1 lowest eigenpairs by shift-invert Lanczos.

    Returns:
        (values, vectors): ascending values, vectors as local vertex
        vectors (columns) with unit mass norm
    '''
    tol, _ = _solver_config(tol, None)
    k = int(k)
    if k < 1:
        raise ValueError(f'k must be at least 1, got {k}')
    asm = assemble(S)
    if asm.interior.size <= k + 1:
        raise EmptyInterior(f'need more than {k + 1} unknowns, have {asm.interior.size}')
    sigma = float(settings.section('solver').get('lambda_k_sigma', -1e-3))
    # fixed start vector keeps ARPACK deterministic
    v0 = np.ones(asm.interior.size)
    try:
        values, vectors = eigsh(asm.stiffness, k + 1, asm.mass, sigma=sigma, which='LM', tol=tol, v0=v0)
    except ArpackNoConvergence as e:
        raise SolverDivergence(f'shift-invert Lanczos did not converge: {e}') from e
    order = np.argsort(values)
    values = values[order]
    if asm.closed:
        values[0] = 0.0
    full = np.zeros((asm.surface.n_vertices, k + 1))
    full[asm.interior] = vectors[:, order]
    logger.debug(f'Solver: lowest {k + 1} eigenvalues {np.array2string(values, precision=6)}')
    return values, full


def lambda_k(S: Region, k, tol=None):
    '''
    The k+1 smallest eigenvalues, ascending, multiplicities counted.

    Closed surfaces use the full matrices and the first value is clamped to 0.
    '''
    values, _ = eigenpairs(S, k, tol)
    return [float(v) for v in values]


def _interior_vector(asm: Assembly, v, parent_vertices=None):
    v = np.asarray(v, dtype=float)
    n_local = asm.surface.n_vertices
    if v.shape == (asm.interior.size,):
        return v
    if v.shape == (n_local,):
        return v[asm.interior]
    if parent_vertices is not None and v.shape == (parent_vertices,):
        return v[asm.vertex_map][asm.interior]
    raise ValueError(f'vector of length {v.shape} does not match the region')


def rayleigh(F: Region, v):
    '''
    (v^T K v) / (v^T M v) with v restricted to the interior.

    Accepts interior vectors, local vertex vectors or parent vertex vectors.
    '''
    asm = assemble(F)
    parent = F.parent.n_vertices if isinstance(F, Subsurface) else None
    x = _interior_vector(asm, v, parent)
    den = float(x @ (asm.mass @ x))
    if not den > 0:
        raise ZeroVector('vector vanishes after Dirichlet masking')
    return float(x @ (asm.stiffness @ x)) / den


def richardson(coarse, fine, ratio, order=2):
    '''Extrapolate two values computed at mesh sizes h and h/ratio.'''
    factor = ratio ** order
    return fine + (fine - coarse) / (factor - 1.0)


def lambda0_refined(build: Callable[[int], Region], resolutions: Optional[Sequence[int]] = None, tol=None):
    '''
    lambda0 on nested refinements with Richardson extrapolation (p = 2).

    Args:
        build: resolution -> region
        resolutions: increasing resolutions, defaults to [refinement] resolutions

    Returns:
        SpectralResult of the finest mesh with `extrapolated` filled in
    '''
    if resolutions is None:
        resolutions = settings.section('refinement').get('resolutions', [16, 32, 64])
    resolutions = [int(r) for r in resolutions]
    if len(resolutions) < 2:
        raise ValueError('extrapolation needs at least two resolutions')
    tol, _ = _solver_config(tol, None)
    results = [lambda0(build(r), tol=tol) for r in resolutions]
    return replace(results[-1], extrapolated=extrapolate([r.lambda0 for r in results], resolutions, tol))


def extrapolate(raw, resolutions, tol=None):
    '''Richardson extrapolation of eigenvalues computed at increasing resolutions.'''
    tol, _ = _solver_config(tol, None)
    raw = tuple(float(v) for v in raw)
    resolutions = [int(r) for r in resolutions]
    if len(raw) < 2 or len(raw) != len(resolutions):
        raise ValueError('extrapolation needs one value per resolution and at least two of them')
    ext = [richardson(raw[i], raw[i + 1], resolutions[i + 1] / resolutions[i])
           for i in range(len(raw) - 1)]
    if len(ext) >= 2:
        error_bar = abs(ext[-1] - ext[-2]) + tol
    else:
        error_bar = abs(ext[-1] - raw[-1]) + tol
    steps = np.diff(raw)
    monotone = bool(np.all(steps <= 0) or np.all(steps >= 0))
    if not monotone:
        logger.warning(f'Solver: refinement values {raw} are not monotone')
    extrapolation = Extrapolation(float(ext[-1]), float(error_bar), raw, tuple(resolutions), monotone)
    logger.info(f'Solver: extrapolated lambda0={extrapolation.value:.8g} +- {extrapolation.error_bar:.2g}')
    return extrapolation


def mass_in(F: Region, region: Subsurface, result: Optional[SpectralResult] = None):
    '''
    Integral of phi^2 over F intersected with region, phi the ground state of F.

    Raises:
        DisjointRegion: region lives on another parent surface
    '''
    parent = F.parent if isinstance(F, Subsurface) else F
    if region.parent is not parent:
        raise DisjointRegion('region and F have different parent surfaces')
    if result is None:
        result = lambda0(F)
    surf, _ = local_surface(F)
    own = F.triangle_ids if isinstance(F, Subsurface) else np.arange(parent.n_triangles)
    mask = np.isin(own, region.triangle_ids)
    if not mask.any():
        return 0.0
    _, M_loc = local_matrices(surf)
    phi = result.ground_state[surf.triangles[mask]]
    return float(np.einsum('fi,fij,fj->', phi, M_loc[mask], phi))
