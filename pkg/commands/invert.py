import logging

from errors import DomainError
from models import CavityGeometry
from output import json_document, write_json
from services.geometry_service import PROTON_GAMMA, GeometryService

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('invert', help='cavity volume and aspect ratio from the pulse period and width')
    parser.add_argument('--period', type=float, help='pulse period T (s)')
    parser.add_argument('--width', type=float, help='pulse width dT (s)')
    parser.add_argument('--concentration', type=float, required=True, help='spin concentration (nm^-3)')
    parser.add_argument('--alpha', type=float, default=0.0, help='angle between symmetry axis and field (rad)')
    parser.add_argument('--gamma', type=float, default=PROTON_GAMMA)
    parser.add_argument('--coupling-sign', type=int, choices=[1, -1], default=1,
                        help='sign of g, not visible in T and dT')
    parser.add_argument('--from-geometry', action='store_true',
                        help='derive T and dT from --a/--b first (round trip)')
    parser.add_argument('--a', type=float, default=None, help='semi-axis along the symmetry axis (nm)')
    parser.add_argument('--b', type=float, default=None, help='transverse semi-axis (nm)')
    parser.add_argument('--out', default=None)
    parser.set_defaults(handler=run)
    return parser


def run(args, run_config):
    payload = {}
    period, width, sign = args.period, args.width, args.coupling_sign
    if args.from_geometry:
        if args.a is None or args.b is None:
            raise DomainError("--from-geometry needs --a and --b")
        geom = CavityGeometry(a=args.a, b=args.b, alpha=args.alpha)
        forward = GeometryService.forward_pulse_observables(geom, args.concentration, args.gamma)
        period, width = forward['period'], forward['width']
        sign = 1 if forward['g'] > 0 else -1
        payload['forward'] = forward
        payload['geometry'] = {'a': geom.a, 'b': geom.b, 'volume_nm3': geom.volume, 'aspect': geom.aspect}
    elif period is None or width is None:
        raise DomainError("give --period and --width, or --from-geometry with --a and --b")

    volume, aspect = GeometryService.invert_measurement(period, width, args.concentration, args.alpha,
                                                        args.gamma, coupling_sign=sign)
    payload.update({
        'period': period,
        'width': width,
        'coupling_sign': sign,
        'volume_nm3': volume,
        'aspect': aspect,
        'n_spins': args.concentration * volume,
    })
    print(json_document(payload, run_config))
    if args.out:
        write_json(args.out, payload, run_config)
    return 0
