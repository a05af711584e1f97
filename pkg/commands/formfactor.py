import logging
import math

from models import CavityGeometry
from output import json_document, write_json
from services.geometry_service import PROTON_GAMMA, GeometryService

logger = logging.getLogger(__name__)

NEAR_MAGIC_P2 = 1e-3


def register(subparsers):
    parser = subparsers.add_parser('formfactor', help='shape integral, form factor and coupling of a cavity')
    parser.add_argument('--a', type=float, required=True, help='semi-axis along the symmetry axis (nm)')
    parser.add_argument('--b', type=float, required=True, help='transverse semi-axis (nm)')
    parser.add_argument('--alpha', type=float, default=0.0, help='angle between symmetry axis and field (rad)')
    parser.add_argument('--gamma', type=float, default=PROTON_GAMMA, help='gyromagnetic ratio (rad/s/G)')
    parser.add_argument('--quadrature', action='store_true', help='cross-check F by direct quadrature')
    parser.add_argument('--out', default=None, help='also write the JSON document to this file')
    parser.set_defaults(handler=run)
    return parser


def run(args, run_config):
    geom = CavityGeometry(a=args.a, b=args.b, alpha=args.alpha)
    shape = GeometryService.shape_integral(geom.aspect)
    p2 = GeometryService.legendre_p2(math.cos(geom.alpha))
    payload = {
        'aspect': geom.aspect,
        'shape_integral': shape,
        'p2': p2,
        'form_factor': GeometryService.form_factor(geom),
        'g': GeometryService.coupling_g(geom, args.gamma),
        'volume_nm3': geom.volume,
        'notes': [],
    }
    if args.quadrature:
        payload['form_factor_quadrature'] = GeometryService.form_factor_quadrature(geom)
    if shape == 0:
        payload['notes'].append('sphere: the shape integral vanishes, so g = 0 and P1 stays at 1')
    if abs(p2) < NEAR_MAGIC_P2:
        payload['notes'].append('near the magic angle: P2(cos alpha) ~ 0, the coupling is suppressed')
        logger.warning(f"alpha={args.alpha} is close to the magic angle (P2={p2:.3e})")

    print(json_document(payload, run_config))
    if args.out:
        write_json(args.out, payload, run_config)
    return 0
