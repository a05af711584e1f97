import argparse
import json
import logging
import os
import sys

from commands import formfactor, invert, lineshape, noise, polarize, validate
from config import Config, RunConfig, read_config_file
from errors import DomainError, NanoSpinError

logger = logging.getLogger(__name__)

COMMANDS = (formfactor, polarize, noise, lineshape, invert, validate)
_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off', ''}


def create_app():
    """Build the command-line parser; returns (parser, {command name: subparser})"""
    logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    parser = argparse.ArgumentParser(prog='nanospin',
                                     description='Spin polarization dynamics in ellipsoidal nano-cavities')
    parser.add_argument('--config', default=None, help='key = value file; explicit flags override it')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    commands = {}
    for module in COMMANDS:
        sub = module.register(subparsers)
        commands[sub.prog.split()[-1]] = sub
    return parser, commands


def _convert(action, raw):
    if action.nargs == 0:
        value = raw.strip().lower()
        if value not in _TRUE | _FALSE:
            raise DomainError(f"config key {action.dest!r} expects a boolean, got {raw!r}")
        return value in _TRUE
    value = action.type(raw) if action.type else raw
    if action.choices is not None and value not in action.choices:
        raise DomainError(f"config key {action.dest!r} must be one of {list(action.choices)}, got {raw!r}")
    return value


def _split_global(commands, argv):
    """Returns (config file, subcommand name) as the top-level parser will see them"""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config', default=None)
    pre.add_argument('-v', '--verbose', action='store_true')
    pre.add_argument('command', nargs='?')
    known, _ = pre.parse_known_args(argv)
    return known.config, known.command if known.command in commands else None


def apply_config_file(parser, commands, argv):
    """Install the values of --config FILE as defaults of the selected subcommand"""
    config_file, name = _split_global(commands, argv)
    if config_file is None:
        return None
    if not os.path.isfile(config_file):
        raise DomainError(f"config file not found: {config_file}")
    if name is None:
        return config_file
    sub = commands[name]
    actions = {action.dest: action for action in sub._actions if action.dest != 'help'}

    defaults = {}
    for key, raw in read_config_file(config_file).items():
        if key not in actions:
            raise DomainError(f"unknown key {key!r} for '{name}' in {config_file}")
        defaults[key] = _convert(actions[key], raw)
        actions[key].required = False
    sub.set_defaults(**defaults)
    logger.debug(f"Loaded {len(defaults)} default(s) for '{name}' from {config_file}")
    return config_file


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, commands = create_app()
    _, command = _split_global(commands, argv)
    try:
        config_file = apply_config_file(parser, commands, argv)
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        run_config = RunConfig.from_namespace(args, config_file)
        return args.handler(args, run_config)
    except NanoSpinError as e:
        logger.error(f"Command {command} failed: {e}")
        print(json.dumps({'command': command, 'error': type(e).__name__, 'message': str(e)}, sort_keys=True),
              file=sys.stderr)
        return 2
