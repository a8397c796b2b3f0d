'''
Experiments on families of surfaces: truncated ends, cyclic covers,
conformal changes away from a core, and ground-state diagnostics.
'''

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import smooth_step
from systole_lab.geometry.covers import cyclic_cover
from systole_lab.geometry.geodesics import distance_graph, inradius, metric_ball
from systole_lab.geometry.surface import (
    ExhaustionFamily,
    MetricSurface,
    Subsurface,
    TopoClass,
    build_exhaustion,
    conformal_scale,
    extract_subsurface,
    whole,
)
from systole_lab.lab.bounds import boundary_loop_length, default_tolerance
from systole_lab.lab.candidates import superlevel_components
from systole_lab.lab.reports import InequalityReport
from systole_lab.spectral.fem import Region
from systole_lab.spectral.solver import lambda0, mass_in
from systole_lab.utils.errors import (
    DeltaOutOfRange,
    EmptySelection,
    FactorNotOneOnCore,
    ModelMismatch,
    NoValidCandidate,
    SystoleLabError,
    WrongClass,
)

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# essential spectrum

@dataclass(frozen=True, eq=False)
class EssSpecEstimate:
    '''
    Attributes:
        values: lambda0 of S - K_i cut at far_radius, one per level
        limit_estimate: extrapolation in the truncation length at the last level
        far_radius, far_radius_short: the two truncation radii
        value_short: lambda0 of the last complement cut at far_radius_short
    '''
    family: ExhaustionFamily
    values: Tuple[float, ...]
    limit_estimate: float
    far_radius: float
    far_radius_short: float
    value_short: float

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.values) >= -1e-12 * max(1.0, max(self.values))))

    @property
    def sensitivity(self):
        return abs(self.value_short - self.values[-1])

    def to_dict(self):
        return {
            'radii': list(self.family.radii),
            'values': list(self.values),
            'limit_estimate': self.limit_estimate,
            'far_radius': self.far_radius,
            'far_radius_short': self.far_radius_short,
            'value_short': self.value_short,
            'sensitivity': self.sensitivity,
            'monotone': self.monotone,
        }


def truncation_limit(length, value, length_short, value_short):
    '''Remove the 1/L^2 truncation term: (L^2 lam(L) - L'^2 lam(L')) / (L^2 - L'^2).'''
    a, b = length ** 2, length_short ** 2
    return (a * value - b * value_short) / (a - b)


def ess_spectrum_estimate(fam: ExhaustionFamily, far=None, far_fraction=None, tol=None):
    '''
    lambda0 of the complements S - K_i with a Dirichlet cut at a far radius.

    The last level is also solved with the far cut moved to
    r_last + far_fraction * (far - r_last); the two values give the limit
    estimate and its sensitivity.
    '''
    if len(fam.radii) < 3:
        raise ValueError(f'an essential spectrum estimate needs at least three levels, got {len(fam.radii)}')
    if far_fraction is None:
        far_fraction = float(settings.section('ess_spectrum').get('far_fraction', 0.5))
    if not 0.0 < far_fraction < 1.0:
        raise ValueError(f'far_fraction must lie in (0, 1), got {far_fraction}')
    far = fam.radial_extent if far is None else float(far)
    last = fam.radii[-1]
    if not far > last:
        raise ValueError(f'far radius {far} must exceed the last level {last}')

    values = tuple(lambda0(fam.complement(i, far=far), tol=tol).lambda0 for i in range(len(fam.radii)))
    length = far - last
    far_short = last + far_fraction * length
    value_short = lambda0(fam.complement(len(fam.radii) - 1, far=far_short), tol=tol).lambda0
    limit = truncation_limit(length, values[-1], far_short - last, value_short)
    estimate = EssSpecEstimate(fam, values, limit, far, far_short, value_short)
    if not estimate.monotone:
        logger.warning(f'Experiments: truncated values {values} are not nondecreasing')
    logger.info(f'Experiments: essential spectrum estimate {limit:.8g} '
                f'(last level {values[-1]:.8g}, sensitivity {estimate.sensitivity:.3g})')
    return estimate


# ----------------------------------------------------------------------
# cyclic covers

@dataclass(frozen=True)
class CoverRow:
    sheets: int
    closed: bool
    lambda0: float
    area: float

    def to_dict(self):
        return {'k': self.sheets, 'cover': 'closed' if self.closed else 'chain',
                'lambda0': self.lambda0, 'area': self.area}


@dataclass(frozen=True)
class CoverTable:
    rows: Tuple[CoverRow, ...]
    exponent: float

    def chain(self):
        return [r for r in self.rows if not r.closed]


def decay_exponent(rows):
    '''Negated log-log slope of lambda0 against k over chain rows with k >= 2.'''
    pts = [(r.sheets, r.lambda0) for r in rows if not r.closed and r.sheets >= 2 and r.lambda0 > 0]
    if len(pts) < 2:
        return math.nan
    k, lam = np.asarray(pts, dtype=float).T
    slope, _ = np.polyfit(np.log(k), np.log(lam), 1)
    return float(-slope)


def cover_experiment(S: MetricSurface, core, ks, closed=True, tol=None):
    '''
    lambda0 of the k-sheeted chain cover along `core` (Dirichlet ends) and,
    with closed=True, of the closed cyclic cover.
    '''
    rows = []
    for k in sorted(int(k) for k in ks):
        kinds = (False, True) if closed else (False,)
        for is_closed in kinds:
            cover = cyclic_cover(S, core, k, closed=is_closed)
            result = lambda0(whole(cover, label=f'cover{k}'), tol=tol)
            rows.append(CoverRow(k, is_closed, result.lambda0, cover.area))
    table = CoverTable(tuple(rows), decay_exponent(rows))
    logger.info(f'Experiments: cover decay exponent {table.exponent:.4g} over {len(table.chain())} chains')
    return table


# ----------------------------------------------------------------------
# conformal change outside a core

def core_factor(radial, t, core_radius, transition):
    '''1 on radial <= core_radius, exp(-t) beyond core_radius + transition, smooth in between.'''
    s = smooth_step((np.asarray(radial, dtype=float) - core_radius) / transition)
    return np.exp(-t * s)


@dataclass(frozen=True)
class ConformalRow:
    t: float
    candidate_values: Tuple[float, ...]
    identical: bool
    upper: float
    ess_limit: float
    ess_ratio: float

    @property
    def expected_ratio(self):
        return math.exp(self.t)

    def to_dict(self):
        return {
            't': self.t,
            'candidate_values': list(self.candidate_values),
            'identical': self.identical,
            'upper': self.upper,
            'ess_limit': self.ess_limit,
            'ess_ratio': self.ess_ratio,
            'expected_ratio': self.expected_ratio,
        }


def core_candidates(S: MetricSurface, core_radius, n=4):
    '''Sub-regions {radial <= r} whose vertices all lie in the core.'''
    top = S.radial[S.triangles].max(axis=1)
    out = []
    for r in np.linspace(core_radius / n, core_radius, n):
        try:
            out.append(extract_subsurface(S, top <= r, label=f'core({r:.4g})'))
        except EmptySelection:
            continue
    return [F for F in out if F.topo_class in (TopoClass.DISC, TopoClass.ANNULUS, TopoClass.CROSS_CAP)]


def conformal_experiment(S: MetricSurface, ts, core_radius, transition=1.0, ess_radii=None,
                         factor=None, tol=None):
    '''
    Scale the metric by f_t outside a core and track candidate eigenvalues
    inside the core and the truncated essential spectrum outside it.

    Args:
        factor: optional callable (t, radial) -> vertex factor, default core_factor
        ess_radii: exhaustion levels for the essential spectrum estimate,
            default three levels beyond the transition

    Raises:
        FactorNotOneOnCore: the factor differs from 1 on a core vertex
    '''
    if S.radial is None:
        raise ModelMismatch('conformal experiment needs a radial coordinate')
    radial = S.radial
    extent = float(radial.max())
    start = core_radius + transition
    if ess_radii is None:
        if not extent > start:
            raise ValueError(f'radial extent {extent} leaves no room beyond the transition')
        ess_radii = start + (extent - start) * np.array([0.1, 0.25, 0.4])
    if factor is None:
        def factor(t, r):
            return core_factor(r, t, core_radius, transition)

    on_core = radial <= core_radius
    base_candidates = core_candidates(S, core_radius)
    if not base_candidates:
        raise NoValidCandidate('no disc or annulus fits inside the core')
    base_values = None
    base_limit = None
    rows = []
    for t in ts:
        t = float(t)
        f = np.asarray(factor(t, radial), dtype=float)
        if np.any(f[on_core] != 1.0):
            raise FactorNotOneOnCore(f'factor at t={t:g} differs from 1 on {int(np.sum(f[on_core] != 1.0))} core vertices')
        St = conformal_scale(S, f)
        candidates = [Subsurface(St, F.triangle_ids, label=F.label) for F in base_candidates]
        values = tuple(lambda0(F, tol=tol).lambda0 for F in candidates)
        if base_values is None:
            base_values = values
        limit = ess_spectrum_estimate(build_exhaustion(St, ess_radii), tol=tol).limit_estimate
        if base_limit is None:
            base_limit = limit
        row = ConformalRow(t, values, values == base_values, min(values), limit, limit / base_limit)
        logger.info(f'Experiments: t={t:g} core values identical={row.identical}, '
                    f'ess ratio {row.ess_ratio:.6g} vs exp(t)={row.expected_ratio:.6g}')
        rows.append(row)
    return rows


# ----------------------------------------------------------------------
# ground-state diagnostics

def _inscribed_ball(F: Subsurface):
    surf = F.surface
    d = distance_graph(surf, True).distance_from(F.boundary_vertices)
    d = np.where(surf.used_vertices & np.isfinite(d), d, -np.inf)
    center = int(np.argmax(d))
    return metric_ball(surf, center, float(d[center]))


def disc_competitors(F: Subsurface, result, quantiles=None, max_components=None):
    '''
    Disc-class superlevel components of phi^2 on F plus the largest
    inscribed ball, as subsurfaces of F's own surface.
    '''
    cfg = settings.section('candidates')
    quantiles = quantiles or int(cfg.get('superlevel_quantiles', 8))
    max_components = max_components or int(cfg.get('superlevel_max_components', 4))
    surf = F.surface
    psi = result.ground_state ** 2
    levels = np.arange(1, quantiles + 1) / (quantiles + 1)
    out = []
    for t in np.quantile(psi[surf.used_vertices], levels):
        for ids in superlevel_components(surf, psi, t, max_components):
            sub = Subsurface(surf, ids, label=f'superlevel({t:.4g})')
            if sub.topo_class is TopoClass.DISC:
                out.append(sub)
    try:
        ball = _inscribed_ball(F)
        if ball.topo_class is TopoClass.DISC:
            out.append(ball)
    except SystoleLabError as e:
        logger.debug(f'Experiments: no inscribed ball: {e}')
    return out


def core_length_diagnostic(F: Subsurface, delta, tolerance=None, instance=''):
    '''
    lambda0(F) >= {1 - delta + 2 (1 - 1/delta) (|F| / l) sqrt(lambda0(F))} Lambda'

    for an annulus F, with l twice its core length and Lambda' the smallest
    lambda0 over discs inside F (superlevel components and the largest
    inscribed ball).

    Raises:
        DeltaOutOfRange: delta outside (0, 1/2)
    '''
    if not 0.0 < delta < 0.5:
        raise DeltaOutOfRange(f'delta must lie in (0, 1/2), got {delta}')
    if F.topo_class is not TopoClass.ANNULUS:
        raise WrongClass(f'expected an annulus, got {F.topo_class.value}')
    tolerance = default_tolerance(tolerance)
    result = lambda0(F)
    ell = boundary_loop_length(F)
    discs = disc_competitors(F, result)
    if not discs:
        raise NoValidCandidate('no disc inside the annulus')
    solved = [lambda0(D).lambda0 for D in discs]
    disc_value = min(solved)
    bracket = 1.0 - delta + 2.0 * (1.0 - 1.0 / delta) * (F.area / ell) * math.sqrt(result.lambda0)
    rhs = bracket * disc_value
    notes = [f'delta={delta:g}', f'bracket={bracket:.8g}', f"disc lambda0={disc_value:.8g}",
             f'l={ell:.8g}', f'margin={result.lambda0 - rhs:.8g}']
    return InequalityReport.evaluate('core_length_diagnostic', result.lambda0, rhs, tolerance,
                                     result.error_bar, instance, notes)


@dataclass(frozen=True)
class MassConcentration:
    masses: Tuple[float, ...]
    constant: float


def mass_concentration(F: Region, fam: ExhaustionFamily, result=None):
    '''
    Ground-state mass of F inside each truncation K_i and the constant
    C = max_i i (1 - mass_i), levels numbered from 1.
    '''
    if result is None:
        result = lambda0(F)
    masses = []
    for K in fam.truncations:
        masses.append(mass_in(F, K, result))
    constant = max((i + 1) * (1.0 - m) for i, m in enumerate(masses))
    logger.info(f'Experiments: ground state masses {np.round(masses, 6).tolist()}, C={constant:.6g}')
    return MassConcentration(tuple(masses), float(constant))


@dataclass(frozen=True)
class InradiusSample:
    level: int
    threshold: float
    radius: float


def inradius_diagnostic(F: Subsurface, fam: ExhaustionFamily, result=None, quantiles=(0.25, 0.5, 0.75)):
    '''Inradius of {phi^2 >= t} intersected with each K_i; logged only.'''
    if result is None:
        result = lambda0(F)
    surf = F.surface
    psi = result.ground_state ** 2
    centroid = surf.centroid_values(psi)
    samples: List[InradiusSample] = []
    for t in np.quantile(psi[surf.used_vertices], quantiles):
        ids = F.triangle_ids[centroid >= t]
        for i, K in enumerate(fam.truncations):
            both = np.intersect1d(ids, K.triangle_ids)
            if both.size == 0:
                continue
            try:
                rho = inradius(Subsurface(F.parent, both))
            except SystoleLabError:
                continue
            samples.append(InradiusSample(i, float(t), rho))
            logger.debug(f'Experiments: inradius of superlevel {t:.4g} in K{i}: {rho:.6g}')
    return samples
