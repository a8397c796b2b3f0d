'''
Closed-form bounds for the analytic systole and the inequality checks
built on them.

Every check returns InequalityReport objects oriented as lhs >= rhs.
'''

import logging
import math
from dataclasses import dataclass

import numpy as np

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import Side, collar_width, ct, kappa_value, tn
from systole_lab.geometry.geodesics import (
    fuchsian_lengths,
    inradius,
    lattice_systole,
    shortest_in_homotopy_class,
    systole_upper,
)
from systole_lab.geometry.surface import MetricSurface, Subsurface, TopoClass
from systole_lab.lab.reports import InequalityReport
from systole_lab.spectral.fem import Region
from systole_lab.spectral.solver import lambda0, lambda_k
from systole_lab.spectral.sweep import ground_state_sweep_check, sweep
from systole_lab.utils.errors import (
    InvalidCurvatureBound,
    MissingCurvatureField,
    ModelMismatch,
    NoBoundary,
    NotClosed,
    PositiveChi,
)

logger = logging.getLogger(__name__)

CURVATURE_SLACK = 1e-9
FUCHSIAN_CAP = 3
# isoperimetric error bar: this constant times (h^2 / |F|) times the compared magnitude
ISOPERIMETRIC_ERROR = 4.0


def default_tolerance(tolerance=None):
    if tolerance is not None:
        return float(tolerance)
    return float(settings.section('report').get('default_tolerance', 0.05))


@dataclass(frozen=True)
class SystoleValue:
    value: float
    certified: bool
    source: str
    one_sided: bool = False


def certified_systole(S: MetricSurface):
    '''
    Systole of a closed surface with its provenance.

    Flat tori use the lattice oracle and the octagon the trace oracle;
    both are exact. Other surfaces fall back to the mesh loop, which only
    bounds the systole from above.
    '''
    if S.model == 'flat_torus' and 'basis' in S.model_data:
        a, b = S.model_data['basis']
        return SystoleValue(lattice_systole(a, b), True, 'lattice')
    if S.model == 'hyperbolic_octagon' and 'generators' in S.model_data:
        return SystoleValue(fuchsian_lengths(S, FUCHSIAN_CAP)[0], True, 'fuchsian')
    loop = systole_upper(S)
    logger.warning(f'Bounds: systole of {S.model} is a mesh upper bound ({loop.length:.6g}), '
                   f'lower bounds built on it are not certified')
    return SystoleValue(loop.length, False, 'mesh', loop.one_sided)


def validate_upper_curvature(S, kappa):
    k = kappa_value(kappa)
    if S.curvature is None:
        logger.warning(f'Bounds: {S.model} has no curvature field, kappa={k:g} taken on trust')
        return k
    top = float(np.max(S.curvature))
    if top > k + CURVATURE_SLACK:
        raise InvalidCurvatureBound(f'curvature reaches {top:.6g} above the bound {k:g}')
    return k


def validate_lower_curvature(S, kappa):
    k = kappa_value(kappa)
    if S.curvature is None:
        logger.warning(f'Bounds: {S.model} has no curvature field, kappa={k:g} taken on trust')
        return k
    low = float(np.min(S.curvature))
    if low < k - CURVATURE_SLACK:
        raise InvalidCurvatureBound(f'curvature reaches {low:.6g} below the bound {k:g}')
    return k


def lambda_lower_bound(S: MetricSurface, kappa, sys=None):
    '''
    Lower bound for the analytic systole of a closed surface with K <= kappa.

    kappa <= 0:               -kappa/4 + min(pi, sys^2/|S|) / |S|
    kappa > 0, orientable:     min(pi/|S| - kappa/4, sys^2/|S|^2)
    kappa > 0, non-orientable: min(pi/|S| - kappa/4, sys^2/(4|S|^2))

    Raises:
        InvalidCurvatureBound: the curvature field exceeds kappa
    '''
    k = validate_upper_curvature(S, kappa)
    if sys is None:
        sys = certified_systole(S).value
    area = S.area
    if k <= 0:
        value = -k / 4.0 + min(math.pi, sys ** 2 / area) / area
    elif S.orientable:
        value = min(math.pi / area - k / 4.0, sys ** 2 / area ** 2)
    else:
        value = min(math.pi / area - k / 4.0, sys ** 2 / (4.0 * area ** 2))
    logger.debug(f'Bounds: lower bound {value:.8g} (kappa={k:g}, sys={sys:.6g}, |S|={area:.6g})')
    return value


def _require_closed_hyperbolic(S):
    if not S.is_closed:
        raise NotClosed('the sandwich needs a closed surface')
    if S.chi >= 0:
        raise PositiveChi(f'the sandwich needs chi < 0, got {S.chi}')
    if S.curvature is None or np.max(np.abs(S.curvature + 1.0)) > 1e-6:
        raise ModelMismatch(f'{S.model} is not a constant curvature -1 model')


def sandwich_bounds(S: MetricSurface):
    '''
    (lower, upper, systole, width) for a closed hyperbolic surface:
    lower = 1/4 + sys^2/(4 pi^2 chi^2), upper = 1/4 + 4 pi^2 / w^2.
    '''
    _require_closed_hyperbolic(S)
    sys = certified_systole(S)
    one_sided = systole_upper(S).one_sided if sys.certified else sys.one_sided
    w = collar_width(sys.value, Side.ONE_SIDED if one_sided else Side.TWO_SIDED)
    lower = 0.25 + sys.value ** 2 / (4.0 * math.pi ** 2 * S.chi ** 2)
    upper = 0.25 + 4.0 * math.pi ** 2 / w ** 2
    return lower, upper, sys, w


def check_sandwich(S: MetricSurface, upper_estimate, tolerance=None, instance=''):
    '''
    Both sides of the hyperbolic sandwich around the upper estimate.

    Args:
        upper_estimate: LambdaUpper from lab.candidates.lambda_upper

    Returns:
        (lower report, upper report)
    '''
    tolerance = default_tolerance(tolerance)
    lower, upper, sys, w = sandwich_bounds(S)
    best = upper_estimate.best
    notes = [f'sys={sys.value:.10g} ({sys.source})', f'w={w:.10g}',
             f'best={best.family.value}#{best.id} {best.topo_class.value}']
    if not sys.certified:
        notes.append('systole not certified')
    error_bar = best.result.error_bar if best.result is not None else 0.0
    low = InequalityReport.evaluate('sandwich_lower', upper_estimate.value, lower, tolerance,
                                    error_bar, instance, notes)
    high = InequalityReport.evaluate('sandwich_upper', upper, upper_estimate.value, tolerance,
                                     error_bar, instance, notes)
    return low, high


def check_candidates_above_lower_bound(S: MetricSurface, records, kappa, tolerance=0.03, instance=''):
    '''
    Every valid candidate lambda0 against the closed-form lower bound.

    The report compares the smallest candidate with the bound; the error
    bar is the largest FEM error bar among the candidates.
    '''
    bound = lambda_lower_bound(S, kappa)
    valid = [r for r in records if r.valid]
    if not valid:
        return InequalityReport.evaluate('candidate_lower_bound', math.nan, bound, tolerance,
                                         instance=instance, notes=['no valid candidate'])
    error_bar = max(r.result.error_bar for r in valid)
    below = [r.id for r in valid if r.lambda0 < bound * (1.0 - tolerance) - error_bar]
    worst = min(valid, key=lambda r: (r.lambda0, r.id))
    notes = [f'{len(valid)} candidates', f'smallest {worst.family.value}#{worst.id}']
    if below:
        notes.append(f'below bound: {below}')
    return InequalityReport.evaluate('candidate_lower_bound', worst.lambda0, bound, tolerance,
                                     error_bar, instance, notes)


def check_brooks(records, tolerance=0.02, instance=''):
    '''Candidates on hyperbolic models stay above the bottom 1/4 of the plane's spectrum.'''
    valid = [r for r in records if r.valid]
    if not valid:
        return InequalityReport.evaluate('brooks', math.nan, 0.25, tolerance,
                                         instance=instance, notes=['no valid candidate'])
    worst = min(valid, key=lambda r: (r.lambda0, r.id))
    return InequalityReport.evaluate('brooks', worst.lambda0, 0.25, tolerance, worst.result.error_bar,
                                     instance, [f'smallest {worst.family.value}#{worst.id}'])


# ----------------------------------------------------------------------
# isoperimetric inequalities

def curvature_excess(F: Subsurface, kappa, certified_bound=False):
    '''Integral of (K - kappa)^+ over F; zero when kappa is a certified bound.'''
    if certified_bound:
        return 0.0
    surf = F.surface
    if surf.curvature is None:
        raise MissingCurvatureField(f'{F.label or "subsurface"} carries no curvature field')
    k = kappa_value(kappa)
    return float(np.dot(np.maximum(surf.curvature - k, 0.0), surf.triangle_areas))


def boundary_loop_length(F: Subsurface):
    '''Twice the shortest core loop of an annulus or cross cap, measured in F.'''
    return 2.0 * shortest_in_homotopy_class(F).length


def check_isoperimetric(F: Subsurface, kappa, certified_bound=False, tolerance=None, instance=''):
    '''
    Isoperimetric inequalities for a subsurface with K <= kappa.

    (area)     |dF|^2 >= -kappa |F|^2 + 2 (2 pi chi - E) |F|
    (inradius) |dF| >= |F| ct(rho) + (2 pi chi - E) tn(rho / 2),   kappa <= 0
    (loops)    sqrt(|dF|^2 - l^2) >= sqrt(-kappa) |F| + (2 pi chi - E) / sqrt(-kappa),
               F not a disc and kappa < 0

    E is the curvature excess, rho the inradius and l the length of the
    shortest loops homotopic to the boundary.

    Returns:
        list of one to three reports
    '''
    tolerance = default_tolerance(tolerance)
    k = kappa_value(kappa)
    excess = curvature_excess(F, k, certified_bound)
    area = F.area
    perimeter = F.boundary_length
    if perimeter <= 0:
        raise NoBoundary('isoperimetric checks need a subsurface with boundary')
    gb = 2.0 * math.pi * F.chi - excess
    h = F.surface.mean_edge_length
    relative = ISOPERIMETRIC_ERROR * h * h / area
    notes = [f'{F.topo_class.value} chi={F.chi}', f'E={excess:.6g}']

    def report(name, lhs, rhs, extra=()):
        return InequalityReport.evaluate(name, lhs, rhs, tolerance, relative * max(abs(lhs), abs(rhs)),
                                         instance, notes + list(extra))

    reports = [report('isoperimetric_area', perimeter ** 2, -k * area ** 2 + 2.0 * gb * area)]
    if k <= 0:
        rho = inradius(F)
        rhs = area * ct(k, rho) + gb * tn(k, rho / 2.0)
        reports.append(report('isoperimetric_inradius', perimeter, rhs, [f'rho={rho:.6g}']))
    if k < 0 and F.topo_class is not TopoClass.DISC:
        if F.topo_class in (TopoClass.ANNULUS, TopoClass.CROSS_CAP):
            ell = boundary_loop_length(F)
            root = math.sqrt(-k)
            lhs = math.sqrt(max(perimeter ** 2 - ell ** 2, 0.0))
            reports.append(report('isoperimetric_loops', lhs, root * area + gb / root, [f'l={ell:.6g}']))
        else:
            logger.info(f'Bounds: loop lengths of a {F.topo_class.value} subsurface are not computed')
    return reports


# ----------------------------------------------------------------------
# Cheeger constant

def cheeger_upper(F: Region, result=None, n_thresholds=None):
    '''
    Minimum |level curve| / |superlevel set| over a sweep of phi^2.

    Every superlevel set is a competitor, so this bounds h(F) from above.
    '''
    if F.is_closed:
        raise NoBoundary('the Cheeger sweep needs a region with boundary')
    if result is None:
        result = lambda0(F)
    profile = sweep(F, result.ground_state ** 2, n_thresholds)
    value = profile.cheeger_ratio()
    logger.info(f'Bounds: Cheeger upper estimate {value:.8g}')
    return value


def check_cheeger(F: Region, cheeger=None, result=None, tolerance=None, instance=''):
    '''
    lambda0 >= h^2 / 4.

    Args:
        cheeger: known Cheeger constant; when omitted the sweep estimate is
            used, which bounds h from above and so only gives a consistency check
    '''
    tolerance = default_tolerance(tolerance)
    if result is None:
        result = lambda0(F)
    notes = []
    if cheeger is None:
        cheeger = cheeger_upper(F, result)
        notes.append('h from the sweep (upper estimate)')
    return InequalityReport.evaluate('cheeger', result.value, cheeger ** 2 / 4.0, tolerance,
                                     result.error_bar, instance, notes)


# ----------------------------------------------------------------------
# eigenvalue count

def check_eigenvalue_bound(S: MetricSurface, kappa=-1.0, upper_estimate=None, tolerance=None, instance=''):
    '''
    lambda_{-chi} <= -kappa/4 + chi^2 16 pi^2 / w^2 for a closed surface with K >= kappa.

    The number of eigenvalues at or below the upper estimate is logged.
    '''
    tolerance = default_tolerance(tolerance)
    if not S.is_closed:
        raise NotClosed('the eigenvalue bound needs a closed surface')
    if S.chi >= 0:
        raise PositiveChi(f'the eigenvalue bound needs chi < 0, got {S.chi}')
    k = validate_lower_curvature(S, kappa)
    sys = certified_systole(S)
    loop = systole_upper(S)
    w = collar_width(sys.value, loop.side)
    n = -S.chi
    values = lambda_k(S, n)
    bound = -k / 4.0 + S.chi ** 2 * 16.0 * math.pi ** 2 / w ** 2
    notes = [f'w={w:.6g}', f'lambda_1..{n}=' + ', '.join(f'{v:.6g}' for v in values[1:])]
    if upper_estimate is not None:
        count = sum(1 for v in values if v <= upper_estimate.value)
        logger.info(f'Bounds: {count} of the lowest {n + 1} eigenvalues lie at or below {upper_estimate.value:.6g}')
        notes.append(f'{count} eigenvalues <= upper estimate')
    return InequalityReport.evaluate('eigenvalue_count_bound', bound, values[n], tolerance,
                                     instance=instance, notes=notes)


def check_ground_state_sweep(F: Region, result=None, tolerance=None, instance=''):
    '''2 sqrt(lambda0) int phi^2 >= int |grad phi^2|, with a slack proportional to the mesh size.'''
    tolerance = default_tolerance(tolerance)
    if result is None:
        result = lambda0(F)
    check = ground_state_sweep_check(F, result)
    return InequalityReport.evaluate('ground_state_sweep', check.rhs, check.lhs, tolerance, check.slack,
                                     instance)
