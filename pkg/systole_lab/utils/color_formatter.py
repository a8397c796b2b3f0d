'''
Ansi color codes for formatting log records in the terminal.
'''

import logging


class ColorFormatter(logging.Formatter):
    '''
    Log formatter that wraps the level name in ANSI escape codes.
    '''
    RESET   = '\033[0m'

    RED     = '\033[31m'
    GREEN   = '\033[32m'
    YELLOW  = '\033[33m'
    CYAN    = '\033[36m'

    BR_BLACK   = '\033[90m'
    BR_RED     = '\033[91m'

    LEVEL_COLORS = {
        logging.DEBUG: BR_BLACK,
        logging.INFO: GREEN,
        logging.WARNING: YELLOW,
        logging.ERROR: RED,
        logging.CRITICAL: BR_RED,
    }

    def __init__(self, fmt=None, datefmt=None, use_color=True):
        super().__init__(fmt=fmt, datefmt=datefmt)
        self.use_color = use_color

    def format(self, record):
        if not self.use_color:
            return super().format(record)
        color = self.LEVEL_COLORS.get(record.levelno, self.CYAN)
        original = record.levelname
        record.levelname = f'{color}{original}{self.RESET}'
        try:
            return super().format(record)
        finally:
            record.levelname = original
