#!/usr/bin/python3

'''
Systole Lab command line front-end.

Subcommands:
- spectrum  lambda0 of a scene, optionally over nested refinements
- systole   shortest essential loop of a scene with its oracle comparison
- lambda    upper estimate of the analytic systole and the candidate table
- cover     lambda0 over cyclic covers of a scene
- verify    run a manifest and write the report bundle
- plot      render SVG plots from a results directory

Exit codes: 0 success, 2 input/schema error, 3 numerical failure,
4 a Violated inequality report, 1 anything else.
'''

import argparse
import logging
import sys

from pydantic import ValidationError

from systole_lab.config import settings
from systole_lab.controllers import runner
from systole_lab.utils.errors import (
    DegenerateTriangle,
    EmptyInterior,
    MissingInput,
    SchemaError,
    SolverDivergence,
    SystoleLabError,
)

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

INPUT_ERRORS = (SchemaError, MissingInput, ValidationError)
NUMERICAL_ERRORS = (SolverDivergence, EmptyInterior, DegenerateTriangle)


def _ks(text):
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated integers, got {text!r}')
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f'sheet counts must be positive: {text!r}')
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog='systole-lab',
                                     description='Spectral geometry experiments on meshed surfaces.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='More logging (-vv for debug).')
    parser.add_argument('--no-color', action='store_true', help='Plain log output.')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, scene=True):
        if scene:
            p.add_argument('--scene', required=True, help='Scene JSON file.')
        p.add_argument('--out', default='out', help='Output directory.')
        p.add_argument('--seed', type=int, default=0, help='Accepted for scripted runs; every command is deterministic.')

    p = sub.add_parser('spectrum', help='lambda0 of a scene.')
    common(p)
    p.add_argument('--export-mesh', action='store_true', help='Also write the finest mesh as OFF plus an edge-length table.')
    p.add_argument('--refinements', type=int, default=1, help='Number of nested resolutions.')
    p.add_argument('--tol', type=float, default=None, help='Solver tolerance.')

    p = sub.add_parser('systole', help='Shortest essential loop.')
    common(p)
    p.add_argument('--export-mesh', action='store_true', help='Also write the mesh as OFF plus an edge-length table.')

    p = sub.add_parser('lambda', help='Upper estimate of the analytic systole.')
    common(p)
    p.add_argument('--jobs', type=int, default=None, help='Concurrent candidate solves.')
    p.add_argument('--tol', type=float, default=None, help='Solver tolerance.')

    p = sub.add_parser('cover', help='lambda0 over cyclic covers.')
    common(p)
    p.add_argument('--ks', type=_ks, default=[2, 4, 8], help='Comma separated sheet counts.')
    p.add_argument('--tol', type=float, default=None, help='Solver tolerance.')

    p = sub.add_parser('verify', help='Run a manifest.')
    p.add_argument('--manifest', required=True, help='Manifest JSON file.')
    p.add_argument('--out', default=None, help='Output directory (defaults to the manifest\'s).')
    p.add_argument('--jobs', type=int, default=None, help='Concurrent candidate solves.')
    p.add_argument('--tol', type=float, default=None, help='Solver tolerance.')
    p.add_argument('--seed', type=int, default=None, help='Recorded in report.json in place of the manifest seed.')

    p = sub.add_parser('plot', help='SVG plots from a results directory.')
    p.add_argument('--results', required=True, help='Directory written by verify or lambda.')
    p.add_argument('--out', default=None, help='Plot directory (defaults to --results).')
    return parser


def dispatch(args):
    if args.command == 'spectrum':
        return runner.cmd_spectrum(args.scene, args.out, args.refinements, args.tol, args.export_mesh)
    if args.command == 'systole':
        return runner.cmd_systole(args.scene, args.out, args.export_mesh)
    if args.command == 'lambda':
        return runner.cmd_lambda(args.scene, args.out, settings.job_count(args.jobs), args.tol)
    if args.command == 'cover':
        return runner.cmd_cover(args.scene, args.out, args.ks, args.tol)
    if args.command == 'verify':
        return runner.cmd_verify(args.manifest, args.out, settings.job_count(args.jobs), args.tol, args.seed)
    if args.command == 'plot':
        return runner.cmd_plot(args.results, args.out)
    raise SchemaError(f'unknown command {args.command!r}')


def main(argv=None):
    '''
    Returns:
        int: process exit code
    '''
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: None, 1: 'INFO'}.get(args.verbose, 'DEBUG')
    settings.configure_logging(level=level, color=False if args.no_color else None)

    try:
        return dispatch(args)
    except INPUT_ERRORS as e:
        logger.error(f'Main: invalid input: {e}')
        return EXIT_INPUT
    except NUMERICAL_ERRORS as e:
        logger.error(f'Main: numerical failure: {type(e).__name__}: {e}')
        return EXIT_NUMERICAL
    except SystoleLabError as e:
        logger.error(f'Main: {type(e).__name__}: {e}')
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f'Main: unexpected error: {e}')
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
