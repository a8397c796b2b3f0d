"""
Command implementations behind the systole-lab front-end.
"""

from .runner import ExperimentRunner

__all__ = [
    'ExperimentRunner',
]
