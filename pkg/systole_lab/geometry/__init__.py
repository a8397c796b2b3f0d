"""
Comparison functions, metric surfaces, generators, loops and covers.
"""

from .surface import ExhaustionFamily, MetricSurface, Subsurface, TopoClass

__all__ = [
    'ExhaustionFamily',
    'MetricSurface',
    'Subsurface',
    'TopoClass',
]
