import logging

import numpy as np

from commands import add_grid_arguments, build_grid
from config import Config
from errors import DomainError
from models import ClusterSpec
from output import write_csv, write_svg
from services.dynamics_service import DynamicsService

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('polarize', help='closed-form P1(t) and other-spin polarization')
    parser.add_argument('--n', type=int, required=True, help='number of spins in the cavity')
    parser.add_argument('--g', type=float, default=0.0, help='coupling (rad/s); 0 selects the tau grid')
    parser.add_argument('--grid-parameter', choices=['tau', 't'], default=None,
                        help="grid variable (default: 't' when g is set, 'tau' otherwise)")
    add_grid_arguments(parser, default_points=200)
    parser.add_argument('--workers', type=int, default=Config.WORKERS)
    parser.add_argument('--out', default='polarize.csv')
    parser.add_argument('--svg', default=None, help='write a plot of P1 to this SVG file')
    parser.set_defaults(handler=run)
    return parser


def run(args, run_config):
    cluster = ClusterSpec(args.n, args.g)
    parameter = args.grid_parameter or ('t' if args.g else 'tau')
    if parameter == 't' and not args.g:
        raise DomainError("a t grid needs a nonzero --g")

    stop = args.stop
    if stop is None:
        # one full period
        stop = DynamicsService.period_tau(args.n)
        if parameter == 't':
            stop = float(cluster.to_t(stop))
    grid = build_grid(args.start, stop, args.points)

    trace = DynamicsService.trace(cluster, grid, parameter=parameter, workers=args.workers)
    t = trace.t if trace.t is not None else np.full_like(trace.tau, np.nan)
    run_config.extra['max_conservation_error'] = trace.max_conservation_error()
    write_csv(args.out, {'t': t, 'tau': trace.tau, 'p1': trace.p1, 'p_other': trace.p_other}, run_config)

    if args.svg:
        x = trace.t if parameter == 't' else trace.tau
        write_svg(args.svg, x, {f'P1, N={args.n}': trace.p1}, title=f'Polarization of spin 1, N={args.n}',
                  xlabel='t (s)' if parameter == 't' else 'tau = gt/2', ylabel='P1')
    logger.info(f"polarize N={args.n}: {grid.size} points, plateau {DynamicsService.p1_time_average(args.n):.9g}")
    return 0
