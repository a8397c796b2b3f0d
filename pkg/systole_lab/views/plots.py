'''
Deterministic SVG plots of run results.

Figures are built with the object API (no pyplot state) and saved with a
fixed hash salt, no date metadata and text kept as text, so the same
input gives byte-identical files.
'''

import logging
import math
from collections import defaultdict

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from systole_lab.config import settings
from systole_lab.geometry.cmpfun import Side, collar_width
from systole_lab.utils.errors import MissingInput

logger = logging.getLogger(__name__)

SVG_RC = {
    'svg.hashsalt': 'systole-lab',
    'svg.fonttype': 'none',
    'path.simplify': False,
}
FIGSIZE = (6.4, 4.8)


def _digits():
    return int(settings.section('report').get('plot_digits', 6))


def _fmt(value):
    return f'{value:.{_digits()}g}'


def _save(fig, path):
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(path, format='svg', metadata={'Date': None})
    logger.info(f'Plots: wrote {path}')
    return True


def plot_candidates(rows, path):
    '''lambda0 against the family parameter (radius, width, threshold), one series per family.'''
    rows = [r for r in rows or [] if r.get('lambda0') is not None and r.get('valid')]
    if not rows:
        raise MissingInput('no solved candidates to plot')
    series = defaultdict(list)
    for r in rows:
        series[r['family']].append((r['parameter'], r['lambda0']))
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    for family in sorted(series):
        pts = sorted(series[family])
        x, y = zip(*pts)
        ax.plot(x, y, marker='o', markersize=3, label=family)
    best = min(rows, key=lambda r: (r['lambda0'], r['id']))
    ax.axhline(best['lambda0'], color='0.4', linestyle=':', linewidth=1)
    ax.set_yscale('log')
    ax.set_xlabel('parameter')
    ax.set_ylabel('lambda0')
    ax.set_title(f'upper estimate {_fmt(best["lambda0"])} ({best["family"]} #{best["id"]})')
    ax.legend()
    return _save(fig, path)


def sandwich_curves(sys_values, chi, side=Side.TWO_SIDED):
    sys_values = np.asarray(sys_values, dtype=float)
    lower = 0.25 + sys_values ** 2 / (4.0 * math.pi ** 2 * chi ** 2)
    widths = np.array([collar_width(s, side) for s in sys_values])
    upper = 0.25 + 4.0 * math.pi ** 2 / widths ** 2
    return lower, upper


def plot_sandwich(data, path):
    '''
    Both sandwich bounds as functions of the systole with the measured
    upper estimate marked at the surface's systole.

    Args:
        data: dict with 'systole', 'chi', 'upper_estimate' and optional 'side'
    '''
    if not data or any(k not in data for k in ('systole', 'chi', 'upper_estimate')):
        raise MissingInput('sandwich data needs systole, chi and upper_estimate')
    sys = float(data['systole'])
    chi = int(data['chi'])
    side = Side(data.get('side', Side.TWO_SIDED.value))
    grid = np.linspace(0.25 * sys, 2.0 * sys, 200)
    lower, upper = sandwich_curves(grid, chi, side)
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    ax.plot(grid, lower, label='lower bound')
    ax.plot(grid, upper, label='upper bound')
    ax.plot([sys], [float(data['upper_estimate'])], marker='*', markersize=10, linestyle='none',
            label=f'upper estimate {_fmt(float(data["upper_estimate"]))}')
    ax.axvline(sys, color='0.4', linestyle=':', linewidth=1)
    ax.set_yscale('log')
    ax.set_xlabel('systole')
    ax.set_ylabel('lambda0')
    ax.set_title(f'chi={chi}, systole {_fmt(sys)}')
    ax.legend()
    return _save(fig, path)


def plot_cover(rows, path):
    '''Chain-cover lambda0 against the number of sheets on log-log axes, with a k^-2 guide.'''
    rows = [r for r in rows or [] if r.get('cover') == 'chain' and r.get('lambda0', 0) > 0]
    if not rows:
        raise MissingInput('no chain cover rows to plot')
    rows = sorted(rows, key=lambda r: r['k'])
    k = np.array([r['k'] for r in rows], dtype=float)
    lam = np.array([r['lambda0'] for r in rows], dtype=float)
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    ax.loglog(k, lam, marker='o', label='chain covers')
    ax.loglog(k, lam[0] * (k / k[0]) ** -2.0, linestyle='--', color='0.4', label='k^-2')
    ax.set_xlabel('sheets')
    ax.set_ylabel('lambda0')
    ax.set_title(f'lambda0 at k={int(k[-1])}: {_fmt(lam[-1])}')
    ax.legend()
    return _save(fig, path)
