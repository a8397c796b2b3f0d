'''
Comparison functions for constant curvature and the collar-width formulas.

sn and cs solve u'' + kappa*u = 0 with (u(0), u'(0)) = (0, 1) and (1, 0).
tn and ct are their ratios. The module also integrates warped-product end
profiles j'' + kappa(x) j = 0 used to build funnels and cusps.
'''

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from systole_lab.utils.errors import InvalidProfile, NonPositiveSystole

logger = logging.getLogger(__name__)

SERIES_CUTOFF = 1e-8


class Side(str, enum.Enum):
    TWO_SIDED = 'TwoSided'
    ONE_SIDED = 'OneSided'


class WarpMode(str, enum.Enum):
    EXPANDING = 'Expanding'
    CUSP = 'Cusp'


@dataclass(frozen=True)
class CurvatureBound:
    '''Upper bound kappa for the Gaussian curvature (units 1/length^2).'''
    kappa: float

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise ValueError(f'curvature bound must be finite, got {self.kappa}')


def kappa_value(value):
    return value.kappa if isinstance(value, CurvatureBound) else float(value)


def sn(kappa, t):
    '''Solution of u'' + kappa u = 0 with u(0) = 0, u'(0) = 1.'''
    kappa = kappa_value(kappa)
    x = kappa * t * t
    if abs(x) < SERIES_CUTOFF:
        return t * (1.0 - x / 6.0 + x * x / 120.0)
    if kappa > 0:
        s = math.sqrt(kappa)
        return math.sin(s * t) / s
    s = math.sqrt(-kappa)
    return math.sinh(s * t) / s


def cs(kappa, t):
    '''Solution of u'' + kappa u = 0 with u(0) = 1, u'(0) = 0.'''
    kappa = kappa_value(kappa)
    x = kappa * t * t
    if abs(x) < SERIES_CUTOFF:
        return 1.0 - x / 2.0 + x * x / 24.0
    if kappa > 0:
        return math.cos(math.sqrt(kappa) * t)
    return math.cosh(math.sqrt(-kappa) * t)


def tn(kappa, t):
    return sn(kappa, t) / cs(kappa, t)


def ct(kappa, t):
    '''cs/sn; raises ZeroDivisionError where sn vanishes (t = 0).'''
    s = sn(kappa, t)
    if s == 0.0:
        raise ZeroDivisionError(f'ct({kappa_value(kappa)}, {t}) is undefined: sn vanishes')
    return cs(kappa, t) / s


def arsinh(x):
    return math.log(x + math.sqrt(x * x + 1.0))


def collar_width(sys_length, side=Side.TWO_SIDED):
    '''
    Half-width of the embedded collar around a systolic geodesic
    in curvature >= -1.

    Args:
        sys_length (float): systole, must be positive
        side (Side): TwoSided uses sys/2, OneSided uses sys

    Returns:
        float: arsinh(1/sinh(sys/2)) or arsinh(1/sinh(sys))
    '''
    if not sys_length > 0:
        raise NonPositiveSystole(f'systole must be positive, got {sys_length}')
    side = Side(side)
    half = sys_length / 2.0 if side is Side.TWO_SIDED else sys_length
    return arsinh(1.0 / math.sinh(half))


def cheng_ball_bound(kappa, radius):
    '''Upper bound -kappa/4 + 4 pi^2 / r^2 for lambda0 of a ball of radius r (kappa <= 0).'''
    return -kappa_value(kappa) / 4.0 + 4.0 * math.pi ** 2 / radius ** 2


def tube_area(kappa, length, width, side=Side.TWO_SIDED):
    '''
    Area and boundary length of the width-w tube around a closed geodesic
    of the given length in constant curvature kappa.

    Returns:
        (area, boundary_length)
    '''
    if not length > 0:
        raise NonPositiveSystole(f'core length must be positive, got {length}')
    if Side(side) is Side.ONE_SIDED:
        # quotient of the two-sided tube around the doubled core
        area, boundary = tube_area(kappa, 2.0 * length, width)
        return area / 2.0, boundary / 2.0
    return 2.0 * length * sn(kappa, width), 2.0 * length * cs(kappa, width)


def radial_dirichlet_eigenvalue(kappa, radius, rtol=1e-11):
    '''
    First Dirichlet eigenvalue of the geodesic ball of radius r in the
    simply connected surface of constant curvature kappa.

    Shoots the radial equation u'' + ct(kappa, r) u' + lam u = 0 from the
    centre and bisects on whether u vanishes inside the ball (Sturm
    comparison makes that predicate monotone in lam).
    '''
    kappa = kappa_value(kappa)
    r0 = radius * 1e-7

    def has_zero(lam):
        def rhs(r, y):
            return [y[1], -ct(kappa, r) * y[1] - lam * y[0]]

        def crossing(r, y):
            return y[0]
        crossing.terminal = True
        crossing.direction = -1

        y0 = [1.0 - lam * r0 * r0 / 4.0, -lam * r0 / 2.0]
        sol = solve_ivp(rhs, (r0, radius), y0, method='DOP853', rtol=rtol, atol=1e-14,
                        events=crossing)
        return sol.status == 1 or sol.y[0, -1] <= 0.0

    lo, hi = 0.0, max(1.0, 4.0 / radius ** 2)
    while not has_zero(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if has_zero(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Warped-product end profiles

def smooth_step(t):
    '''C-infinity step: 0 for t <= 0, 1 for t >= 1.'''
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def constant_profile(kappa):
    kappa = float(kappa)

    def profile(x):
        return np.full_like(np.asarray(x, dtype=float), kappa)
    return profile


def pinched_profile(kappa_inf=-4.0, start=1.0, width=1.0):
    '''Monotone curvature profile equal to -1 on x <= start and kappa_inf beyond start + width.'''
    kappa_inf = float(kappa_inf)

    def profile(x):
        return -1.0 + (kappa_inf + 1.0) * smooth_step((np.asarray(x, dtype=float) - start) / width)
    return profile


@dataclass(frozen=True)
class WarpProfile:
    '''
    Warping function j on [0, x_max] sampled on a grid, with a dense
    interpolant for evaluation between grid points.
    '''
    x: np.ndarray
    j: np.ndarray
    dj: np.ndarray
    kappa: Callable
    mode: WarpMode
    _dense: Callable = field(repr=False)

    def __call__(self, x):
        return self._dense(x)[0]

    def derivative(self, x):
        return self._dense(x)[1]

    def curvature(self, x):
        return np.asarray(self.kappa(x), dtype=float)

    @property
    def x_max(self):
        return float(self.x[-1])

    def residual(self, eps=5e-3):
        '''Max of |j'' + kappa j| / max(1, |j|) on the interior grid, j'' by a 4th order stencil on j'.'''
        xs = self.x[(self.x - 2 * eps > self.x[0]) & (self.x + 2 * eps < self.x[-1])]
        d = self.derivative
        d2 = (-d(xs + 2 * eps) + 8 * d(xs + eps) - 8 * d(xs - eps) + d(xs - 2 * eps)) / (12 * eps)
        j = self(xs)
        res = np.abs(d2 + self.curvature(xs) * j) / np.maximum(1.0, np.abs(j))
        return float(res.max()) if res.size else 0.0


def _validate_profile(kappa_profile, mode, grid):
    kappa = np.broadcast_to(np.asarray(kappa_profile(grid), dtype=float), grid.shape)
    if not np.all(np.isfinite(kappa)):
        raise InvalidProfile('curvature profile has non-finite values')
    steps = np.diff(kappa)
    if mode is WarpMode.EXPANDING:
        plateau = kappa[grid <= 1.0]
        if plateau.size == 0 or np.max(np.abs(plateau + 1.0)) > 1e-12:
            raise InvalidProfile('expanding profile must equal -1 on x <= 1')
        if np.any(steps > 1e-12):
            raise InvalidProfile('expanding profile must be nonincreasing')
    else:
        if np.any(kappa >= 0):
            raise InvalidProfile('cusp profile must be negative')
        if np.any(steps > 1e-12) and np.any(steps < -1e-12):
            raise InvalidProfile('cusp profile must be monotone')


def funnel_warp(kappa_profile, mode=WarpMode.EXPANDING, x_max=8.0, n=801, rtol=1e-12):
    '''
    Solve j'' + kappa(x) j = 0 with j(0) = 1 for a funnel or cusp end.

    Expanding ends use j'(0) = 0 and integrate forward. Cusp ends impose
    j(inf) = 0: the log-derivative u = j'/j solves u' = -kappa - u^2, which
    is stable when integrated backwards from its asymptotic value
    -sqrt(-kappa), and j = exp(int_0^x u).

    Args:
        kappa_profile: vectorized callable x -> kappa(x)
        mode (WarpMode): Expanding or Cusp
        x_max (float): right end of the returned grid
        n (int): number of grid samples

    Returns:
        WarpProfile
    '''
    mode = WarpMode(mode)
    grid = np.linspace(0.0, float(x_max), int(n))
    _validate_profile(kappa_profile, mode, grid)

    def kappa_at(x):
        return float(np.asarray(kappa_profile(np.asarray([x])), dtype=float).reshape(-1)[0])

    if mode is WarpMode.EXPANDING:
        def rhs(x, y):
            return [y[1], -kappa_at(x) * y[0]]
        sol = solve_ivp(rhs, (0.0, grid[-1]), [1.0, 0.0], method='DOP853',
                        rtol=rtol, atol=1e-14, dense_output=True)
        if not sol.success:
            raise InvalidProfile(f'warp integration failed: {sol.message}')

        def dense(x):
            y = sol.sol(np.asarray(x, dtype=float))
            return y[0], y[1]
    else:
        k_far = kappa_at(grid[-1])
        far = grid[-1] + 15.0 / math.sqrt(-k_far)
        u_far = -math.sqrt(-kappa_at(far))

        def rhs(x, y):
            return [-kappa_at(x) - y[0] * y[0], y[0]]
        sol = solve_ivp(rhs, (far, 0.0), [u_far, 0.0], method='DOP853',
                        rtol=rtol, atol=1e-14, dense_output=True)
        if not sol.success:
            raise InvalidProfile(f'warp integration failed: {sol.message}')
        offset = sol.sol(0.0)[1]

        def dense(x):
            u, integral = sol.sol(np.asarray(x, dtype=float))
            j = np.exp(integral - offset)
            return j, u * j

    j, dj = dense(grid)
    profile = WarpProfile(x=grid, j=np.asarray(j), dj=np.asarray(dj), kappa=kappa_profile,
                          mode=mode, _dense=dense)
    logger.debug(f'WarpProfile: {mode.value} on [0, {x_max}] j(x_max)={profile.j[-1]:.6g}')
    return profile


def log_derivative(profile: WarpProfile, x: Optional[float] = None):
    '''j'/j at x (default: right end of the grid).'''
    x = profile.x_max if x is None else x
    return float(profile.derivative(x) / profile(x))
