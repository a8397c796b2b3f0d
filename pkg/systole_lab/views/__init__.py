"""
SVG plots of run results.
"""

from .plots import plot_candidates, plot_cover, plot_sandwich

__all__ = [
    'plot_candidates',
    'plot_cover',
    'plot_sandwich',
]
