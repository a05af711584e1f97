import logging

import numpy as np

from commands import add_grid_arguments, build_grid
from config import Config
from errors import DomainError
from models import NoiseModel
from output import write_csv, write_svg
from services.noise_service import NoiseService

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('noise', help='P1(t) averaged over Gaussian coupling noise')
    parser.add_argument('--n', type=int, required=True, help='number of spins in the cavity')
    parser.add_argument('--g', type=float, required=True, help='mean coupling <g> (rad/s)')
    parser.add_argument('--relative-variance', type=float, default=None, help='<dg^2>/<g>^2')
    parser.add_argument('--variance', type=float, default=None, help='<dg^2> (rad^2/s^2)')
    parser.add_argument('--t-c', type=float, required=True, help='correlation time (s)')
    add_grid_arguments(parser, default_points=400)
    parser.add_argument('--realizations', type=int, default=200,
                        help='Monte Carlo realizations; 0 skips the Monte Carlo columns')
    parser.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    parser.add_argument('--workers', type=int, default=Config.WORKERS)
    parser.add_argument('--out', default='noise.csv')
    parser.add_argument('--svg', default=None)
    parser.set_defaults(handler=run)
    return parser


def _variance(args):
    if (args.variance is None) == (args.relative_variance is None):
        raise DomainError("give exactly one of --variance and --relative-variance")
    if args.variance is not None:
        return args.variance
    return args.relative_variance * args.g ** 2


def run(args, run_config):
    model = NoiseModel(mean_g=args.g, variance=_variance(args), t_c=args.t_c)
    stop = args.stop if args.stop is not None else 20.0 * np.pi / abs(args.g)  # ten peaks
    t = build_grid(args.start, stop, args.points)

    analytic = NoiseService.p1_noise_analytic(args.n, t, model)
    approx = NoiseService.p1_noise_gaussian_approx(args.n, t, model)
    columns = {'t': t, 'analytic': analytic, 'approx': approx}
    run_config.extra['approx_reliable'] = NoiseService.is_approx_reliable(args.n)

    mc = None
    if args.realizations:
        mc = NoiseService.monte_carlo(args.n, t, model, args.realizations, args.seed, workers=args.workers)
        columns['mc_mean'] = mc.mean
        columns['mc_stderr'] = mc.stderr
        run_config.extra['mc_within_3_stderr'] = NoiseService.monte_carlo_agreement(mc, analytic)
    write_csv(args.out, columns, run_config)

    if args.svg:
        series = {'analytic': analytic, 'Gaussian approximation': approx}
        errors = None
        if mc is not None:
            series['Monte Carlo'] = mc.mean
            errors = {'Monte Carlo': mc.stderr}
        write_svg(args.svg, t, series, title=f'Noise-averaged P1, N={args.n}', xlabel='t (s)', ylabel='P1',
                  errors=errors)
    return 0
