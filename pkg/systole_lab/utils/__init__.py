"""
Systole Lab - Utility Modules

Error types, the log formatter and result persistence.
"""

from .color_formatter import ColorFormatter
from .data_handler import ResultWriter, rounded
from .errors import SystoleLabError

__all__ = [
    'ColorFormatter',
    'ResultWriter',
    'SystoleLabError',
    'rounded',
]
