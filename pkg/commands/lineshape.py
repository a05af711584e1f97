import logging

import numpy as np
from scipy import integrate

from config import Config
from models import SpectrumRoute
from output import write_csv, write_json, write_svg
from services.lineshape_service import LineShapeService

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('lineshape', help='FID, NMR spectrum and moments')
    parser.add_argument('--n', type=int, required=True, help='number of spins in the cavity')
    parser.add_argument('--g', type=float, required=True, help='coupling (rad/s)')
    parser.add_argument('--t2', type=float, default=Config.DEFAULT_T2, help='transverse decay time (s)')
    parser.add_argument('--route', choices=[r.value for r in SpectrumRoute], default=SpectrumRoute.ANALYTIC.value)
    parser.add_argument('--span', type=float, default=1.5,
                        help='half-width of the frequency grid in units of 3g(N-1)/2 (at least 1.2)')
    parser.add_argument('--points', type=int, default=2001)
    parser.add_argument('--out', default='lineshape.csv')
    parser.add_argument('--moments-out', default='lineshape.json')
    parser.add_argument('--svg', default=None)
    parser.set_defaults(handler=run)
    return parser


def run(args, run_config):
    half_width = max(args.span * 1.5 * abs(args.g) * (args.n - 1), 10.0 / args.t2)
    omega = np.linspace(-half_width, half_width, args.points)
    shape = LineShapeService.spectrum(args.n, args.g, args.t2, omega, route=SpectrumRoute(args.route))
    m2_fid, m4_fid = LineShapeService.moments_from_fid(args.n, args.g)
    positions, weights = LineShapeService.line_comb(args.n, args.g)

    write_csv(args.out, {'omega': shape.omega_grid, 'spectrum': shape.spectrum}, run_config)
    write_json(args.moments_out, {
        'm2': shape.m2,
        'm4': shape.m4,
        'm2_from_fid': m2_fid,
        'm4_from_fid': m4_fid,
        'captured_fraction': shape.captured_fraction,
        'normalization': float(integrate.trapezoid(shape.spectrum, shape.omega_grid)),
        'line_comb': {'positions': positions, 'weights': weights},
        'metadata': shape.metadata,
    }, run_config)

    if args.svg:
        write_svg(args.svg, shape.omega_grid, {f'N={args.n}': shape.spectrum},
                  title=f'Line shape, N={args.n}, T2={args.t2:g}s', xlabel='omega (rad/s)', ylabel='spectrum (s/rad)')
    return 0
