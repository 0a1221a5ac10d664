import os
import sys
import logging
import argparse
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from .controllers import simulate, estimate_exponent, sweep, check, list_presets, EXIT_CONFIG
from .models import ConfigError, PresetCatalog, parse_config

# Configure logging
logging.basicConfig(
    level=os.getenv('INVSTEER_LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)
logger = logging.getLogger(__name__)

# Flag destination -> config key, for every overridable setting
OVERRIDE_KEYS = (
    'alpha', 'kappa', 'kappa_eff', 'delta', 'c', 'dt', 't0', 't1', 't_max', 'seed',
    'convergence_tol', 'guard', 'sample_every', 'sync_partner', 'horizon', 'burn_in',
    'param', 'start', 'stop', 'step', 'workers', 'output_dir',
)


class CliParser(argparse.ArgumentParser):
    """Argument errors surface as configuration errors (exit 1)"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError('arguments', message)


def _add_experiment_options(parser: argparse.ArgumentParser):
    parser.add_argument('preset', nargs='?', choices=PresetCatalog.names())
    parser.add_argument('--preset', dest='preset_flag', choices=PresetCatalog.names())
    parser.add_argument('--config', help='flat key = value settings file')
    parser.add_argument('--output-dir', dest='output_dir')
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--kappa', type=float)
    parser.add_argument('--kappa-eff', dest='kappa_eff', type=float)
    parser.add_argument('--delta', type=float)
    parser.add_argument('--c', type=float)
    parser.add_argument('--dt', type=float)
    parser.add_argument('--t0', type=float)
    parser.add_argument('--t1', type=float)
    parser.add_argument('--t-max', dest='t_max', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--convergence-tol', dest='convergence_tol', type=float)
    parser.add_argument('--sample-every', dest='sample_every', type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog='invsteer', description='Impulsive steering toward invariant manifolds')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('simulate', help='run a controlled experiment')
    _add_experiment_options(run)
    run.add_argument('--guard', choices=['clamp', 'growth-only'])
    run.add_argument('--sync-partner', dest='sync_partner', choices=['previous', 'current'])
    run.add_argument('--no-control', dest='control', action='store_false', default=None)
    run.add_argument('--plot-script', action='store_true')

    ds = commands.add_parser('ds', help='estimate the stability exponent D_S')
    _add_experiment_options(ds)
    ds.add_argument('--horizon', type=float)
    ds.add_argument('--burn-in', dest='burn_in', type=float)

    scan = commands.add_parser('sweep', help='sweep D_S over a parameter grid')
    _add_experiment_options(scan)
    scan.add_argument('--horizon', type=float)
    scan.add_argument('--burn-in', dest='burn_in', type=float)
    scan.add_argument('--param')
    scan.add_argument('--start', '--from', dest='start', type=float)
    scan.add_argument('--stop', '--to', dest='stop', type=float)
    scan.add_argument('--step', type=float)
    scan.add_argument('--workers', type=int)
    scan.add_argument('--bisect', action='store_true', default=None)

    verify = commands.add_parser('check', help='check convergence criteria on a stored run')
    verify.add_argument('run_dir')
    verify.add_argument('--ds-bound', dest='ds_bound', type=float)
    verify.add_argument('--lambda-bound', dest='lambda_bound', type=float)

    commands.add_parser('list-presets', help='list bundled presets')
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    values = {key: getattr(args, key, None) for key in OVERRIDE_KEYS}
    for key in ('control', 'bisect'):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    return values


def _preset(args: argparse.Namespace) -> Optional[str]:
    """Preset from --preset or the positional form; None defers to the config file"""
    if args.preset and args.preset_flag and args.preset != args.preset_flag:
        raise ConfigError('preset', f"given twice: '{args.preset}' and '{args.preset_flag}'")
    return args.preset_flag or args.preset


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch to a command handler, return the exit code"""
    try:
        args = build_parser().parse_args(argv)
        if args.command == 'list-presets':
            return list_presets()
        if args.command == 'check':
            return check(args.run_dir, args.ds_bound, args.lambda_bound)

        config = parse_config(args.config, _overrides(args), preset=_preset(args))
        if args.command == 'simulate':
            return simulate(config, plot_script=args.plot_script)
        if args.command == 'ds':
            return estimate_exponent(config)
        return sweep(config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(cli_main())
