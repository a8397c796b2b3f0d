'''
Direct TOML configuration access for the systole lab.
'''

import logging
import os
import sys

import tomli

from systole_lab.utils.color_formatter import ColorFormatter

CONFIG_DIR = os.path.dirname(os.path.abspath(__file__))
JOBS_ENV = 'SYSTOLE_LAB_JOBS'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def load_toml(filename, directory=CONFIG_DIR):
    '''Load a TOML file and return the parsed dictionary.'''
    path = os.path.join(directory, filename)
    try:
        with open(path, 'rb') as f:
            return tomli.load(f)
    except Exception as e:
        logger.error(f'Settings: error loading {path}: {e}')
        return {}


def section(name):
    '''Return a config section as a dict, empty when absent.'''
    return app_config.get(name, {})


def job_count(cli_value=None):
    '''
    Number of concurrent candidate jobs.

    The SYSTOLE_LAB_JOBS environment variable wins over the command line,
    which wins over app_config.toml.
    '''
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f'Settings: ignoring non-integer {JOBS_ENV}={env!r}')
    if cli_value:
        return max(1, int(cli_value))
    return max(1, int(section('jobs').get('default', 1)))


def configure_logging(level=None, color=None, stream=None):
    '''Install the package log handler on the root logger.'''
    log_cfg = section('log')
    stream = stream or sys.stderr
    if level is None:
        level = log_cfg.get('level', 'INFO')
    if color is None:
        color = log_cfg.get('color', True) and hasattr(stream, 'isatty') and stream.isatty()

    handler = logging.StreamHandler(stream)
    handler.setFormatter(ColorFormatter(log_cfg.get('format', LOG_FORMAT), use_color=color))

    root = logging.getLogger()
    for existing in list(root.handlers):
        if getattr(existing, '_systole_lab', False):
            root.removeHandler(existing)
    handler._systole_lab = True
    root.addHandler(handler)
    root.setLevel(level)
    return handler


# Load application configuration and info at import time
app_config = load_toml('app_config.toml')
app_info = load_toml('app_info.toml')
