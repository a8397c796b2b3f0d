'''
Level-set sweeps of a nonnegative P1 density.

For thresholds t the sweep records the area A(t) of {psi >= t} and the
length L(t) of {psi = t}, both exact for the piecewise linear
interpolant inside each triangle.
'''

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from systole_lab.config import settings
from systole_lab.spectral.fem import Region, local_surface
from systole_lab.utils.errors import NegativeDensity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SweepProfile:
    '''
    Attributes:
        thresholds: increasing, starting at 0 and ending at max psi
        areas: A(t), nonincreasing
        lengths: L(t)
        ratios: L/A (nan where A vanishes)
        integral_psi, integral_grad: integrals of psi and |grad psi|
        cavalieri_error: relative gap between int A dt and int psi
        coarea_error: relative gap between int L dt and int |grad psi|
    '''
    thresholds: np.ndarray
    areas: np.ndarray
    lengths: np.ndarray
    ratios: np.ndarray
    integral_psi: float
    integral_grad: float
    cavalieri_error: float
    coarea_error: float

    def cheeger_ratio(self):
        '''Minimum L/A over thresholds with a nonempty level set.'''
        ok = (self.areas > 0) & (self.lengths > 0)
        if not ok.any():
            return math.inf
        return float(np.min(self.ratios[ok]))


@dataclass(frozen=True)
class SweepCheck:
    lhs: float
    rhs: float
    slack: float

    @property
    def holds(self):
        return self.lhs <= self.rhs + self.slack


def area_weighted_quantiles(values, weights, levels):
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    cum /= cum[-1]
    idx = np.searchsorted(cum, levels, side='left')
    return values[order][np.minimum(idx, len(values) - 1)]


def superlevel_fraction(vals, t):
    '''Fraction of each triangle where the linear interpolant of sorted corner values is >= t.'''
    a, b, c = vals[:, 0], vals[:, 1], vals[:, 2]
    out = np.zeros(len(vals))
    out[t <= a] = 1.0
    with np.errstate(divide='ignore', invalid='ignore'):
        low = (t > a) & (t <= b)
        out[low] = 1.0 - (t - a[low]) ** 2 / ((b[low] - a[low]) * (c[low] - a[low]))
        high = (t > b) & (t < c)
        out[high] = (c[high] - t) ** 2 / ((c[high] - a[high]) * (c[high] - b[high]))
    return out


def _metric_norm(vec, G):
    return np.sqrt(np.maximum(np.einsum('fa,fab,fb->f', vec, G, vec), 0.0))


def level_lengths(coords, G, vals, t):
    '''Length of {psi = t} in each triangle (sorted corners, local frames).'''
    a, b, c = vals[:, 0], vals[:, 1], vals[:, 2]
    cross = (t > a) & (t < c)
    out = np.zeros(len(vals))
    if not cross.any():
        return out
    P = coords[cross]
    a, b, c = a[cross], b[cross], c[cross]
    p_ac = P[:, 0] + ((t - a) / (c - a))[:, None] * (P[:, 2] - P[:, 0])
    lower = t < b
    with np.errstate(divide='ignore', invalid='ignore'):
        p_ab = P[:, 0] + ((t - a) / (b - a))[:, None] * (P[:, 1] - P[:, 0])
        p_bc = P[:, 1] + ((t - b) / (c - b))[:, None] * (P[:, 2] - P[:, 1])
    other = np.where(lower[:, None], p_ab, p_bc)
    out[cross] = _metric_norm(other - p_ac, G[cross])
    return out


def gradient_norms(coords, G, vals):
    '''|grad psi| per triangle of the linear interpolant, in the triangle metric.'''
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    J = np.stack([e1, e2], axis=2)
    rhs = np.stack([vals[:, 1] - vals[:, 0], vals[:, 2] - vals[:, 0]], axis=1)
    grad = np.linalg.solve(np.transpose(J, (0, 2, 1)), rhs[..., None])[..., 0]
    return _metric_norm(grad, np.linalg.inv(G))


def sweep(F: Region, density, n_thresholds: Optional[int] = None):
    '''
    Superlevel areas and level lengths of a vertex density on F.

    Args:
        F: region
        density: local vertex vector (see SpectralResult.ground_state)
        n_thresholds: number of thresholds, defaults to [sweep] n_thresholds

    Raises:
        NegativeDensity: some entry of density is negative
    '''
    if n_thresholds is None:
        n_thresholds = int(settings.section('sweep').get('n_thresholds', 256))
    n_thresholds = max(int(n_thresholds), 3)
    surf, _ = local_surface(F)
    psi = np.asarray(density, dtype=float)
    if psi.shape != (surf.n_vertices,):
        raise ValueError(f'density has shape {psi.shape}, expected ({surf.n_vertices},)')
    if np.any(psi < 0):
        raise NegativeDensity(f'density has {int(np.sum(psi < 0))} negative entries')

    area = surf.triangle_areas
    coords, G = surf.local_frames
    corner = psi[surf.triangles]
    order = np.argsort(corner, axis=1, kind='stable')
    vals = np.take_along_axis(corner, order, axis=1)
    sorted_coords = np.take_along_axis(coords, order[..., None], axis=1)

    lumped = np.zeros(surf.n_vertices)
    np.add.at(lumped, surf.triangles.ravel(), np.repeat(area / 3.0, 3))
    used = surf.used_vertices
    levels = (np.arange(1, n_thresholds - 1) - 0.5) / (n_thresholds - 2)
    quantiles = np.unique(area_weighted_quantiles(psi[used], lumped[used], levels))
    top = float(psi[used].max())
    # interior thresholds sit between vertex values so no level set runs along an edge
    mids = (quantiles[1:] + quantiles[:-1]) / 2.0
    thresholds = np.unique(np.concatenate([[0.0], mids, [top]]))

    areas = np.array([np.dot(area, superlevel_fraction(vals, t)) for t in thresholds])
    lengths = np.array([level_lengths(sorted_coords, G, vals, t).sum() for t in thresholds])
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(areas > 0, lengths / areas, np.nan)

    integral_psi = float(np.dot(area, corner.mean(axis=1)))
    integral_grad = float(np.dot(area, gradient_norms(coords, G, corner)))
    cav = float(np.trapezoid(areas, thresholds))
    co = float(np.trapezoid(lengths, thresholds))
    cavalieri_error = abs(cav - integral_psi) / integral_psi if integral_psi > 0 else 0.0
    coarea_error = abs(co - integral_grad) / integral_grad if integral_grad > 0 else 0.0
    logger.debug(f'Sweep: {len(thresholds)} thresholds, cavalieri {cavalieri_error:.2e}, '
                 f'coarea {coarea_error:.2e}')
    return SweepProfile(thresholds, areas, lengths, ratios, integral_psi, integral_grad,
                        cavalieri_error, coarea_error)


def ground_state_sweep_check(F: Region, result, n_thresholds=None):
    '''
    Compare int |grad psi| with 2 sqrt(lambda0) int psi for psi = phi^2.

    The slack is proportional to the mesh size.
    '''
    psi = result.ground_state ** 2
    profile = sweep(F, psi, n_thresholds)
    lhs = profile.integral_grad
    rhs = 2.0 * math.sqrt(max(result.lambda0, 0.0)) * profile.integral_psi
    slack = rhs * result.mesh_h
    check = SweepCheck(lhs, rhs, slack)
    if not check.holds:
        logger.warning(f'Sweep: int|grad psi|={lhs:.6g} exceeds 2 sqrt(lambda0) int psi={rhs:.6g}')
    return check
