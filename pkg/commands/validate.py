"""Cross-validation suite: closed form, Clebsch-Gordan path and brute-force oracle, plus the invariant checks.

Exit code 0 when every check passes, 1 otherwise.
"""
import logging
import math

import numpy as np
from scipy import integrate

from config import Config
from errors import DomainError, ValidationFailure
from models import CavityGeometry, ClusterSpec, SpectrumRoute, ThetaSide
from output import write_json
from services.asymptotics_service import AsymptoticsService
from services.dynamics_service import DynamicsService
from services.geometry_service import GeometryService
from services.lineshape_service import LineShapeService
from services.oracle_service import MAX_N, OracleService
from services.spectral_cg_service import SpectralCGService

logger = logging.getLogger(__name__)

TRACE_POINTS = 200
INVARIANCE_MAX_N = 10


def register(subparsers):
    parser = subparsers.add_parser('validate', help='run the cross-validation suite')
    parser.add_argument('--max-n', type=int, default=Config.VALIDATE_MAX_N, help=f'largest cluster (<= {MAX_N})')
    parser.add_argument('--tolerance', type=float, default=Config.VALIDATE_TOLERANCE)
    parser.add_argument('--inject-weight-error', type=float, default=0.0,
                        help='add this to the leading closed-form weight (negative control)')
    parser.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    parser.add_argument('--out', default=None, help='write the report as JSON')
    parser.set_defaults(handler=run)
    return parser


def _closed_form(n, tau, weight_error):
    freqs, weights = DynamicsService.spectral_weights(n)
    if weight_error:
        weights = weights.copy()
        weights[0] += weight_error
    return DynamicsService.p1_time_average(n) + DynamicsService.oscillating_sum(freqs, weights, tau)


def _full_period_grid(n, points=TRACE_POINTS):
    return np.linspace(0.0, 2.0 * math.pi if n % 2 else math.pi, points)


def check_oracle_equivalence(sizes, weight_error, rng):
    gap = 0.0
    for n in sizes:
        omega, zeta = rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0)
        ops = OracleService.build_operators(n, omega=omega, g=1.0, zeta=zeta)
        tau = _full_period_grid(n)
        oracle = OracleService.polarization_trace_exact(ops, 1, 2.0 * tau)
        gap = max(gap, float(np.max(np.abs(oracle - _closed_form(n, tau, weight_error)))))
    return gap


def check_cg_equivalence(sizes, weight_error):
    gap = 0.0
    for n in sizes:
        tau = _full_period_grid(n)
        gap = max(gap, float(np.max(np.abs(SpectralCGService.p1_via_cg(n, tau) - _closed_form(n, tau, weight_error)))))
    return gap


def check_time_averages(sizes):
    gap = 0.0
    for n in sizes:
        ops = OracleService.build_effective(n)
        # equispaced samples over a full period average every harmonic below 4N to zero
        tau = np.linspace(0.0, 2.0 * math.pi, 4 * n, endpoint=False)
        average = float(np.mean(OracleService.polarization_trace_exact(ops, 1, 2.0 * tau)))
        expected = DynamicsService.p1_time_average(n)
        gap = max(gap, abs(average - expected), abs(SpectralCGService.stationary_part(n) - expected))
    return gap


def check_invariance(sizes, tolerance, rng):
    gap = 0.0
    for n in sizes:
        params = [(rng.uniform(-10.0, 10.0), rng.uniform(-3.0, 3.0)) for _ in range(2)]
        report = OracleService.invariance_check(n, rng.uniform(0.0, 4.0 * math.pi, 20), params, tolerance=tolerance)
        gap = max(gap, report.max_hamiltonian_gap, report.max_conservation_error, report.max_equivalence_gap)
    return gap


def check_multiplicities(sizes):
    mismatches = 0
    for n in sizes:
        counts = OracleService.spectrum_multiplicities(OracleService.build_effective(n))
        expected = {two_i: (two_i + 1) * SpectralCGService.multiplicity_w(two_i, n)
                    for two_i in range(n % 2, n + 1, 2)}
        mismatches += sum(counts.get(k, 0) != v for k, v in expected.items()) + len(set(counts) - set(expected))
    return float(mismatches)


def check_symmetry(sizes):
    gap = 0.0
    for n in sizes:
        cluster = ClusterSpec(n)
        x = np.linspace(0.0, 1.5, 50)
        period = DynamicsService.period_tau(n)
        gap = max(gap, float(np.max(np.abs(DynamicsService.p1_exact(cluster, x + period)
                                           - DynamicsService.p1_exact(cluster, x)))))
        if n % 2:
            left = DynamicsService.p1_oscillating(cluster, math.pi / 2 - x)
            right = DynamicsService.p1_oscillating(cluster, math.pi / 2 + x)
            gap = max(gap, float(np.max(np.abs(left + right))))
        else:
            gap = max(gap, float(np.max(np.abs(DynamicsService.p1_exact(cluster, math.pi - x)
                                               - DynamicsService.p1_exact(cluster, math.pi + x)))))
    return gap


def check_theta_identity():
    gap = 0.0
    for eps in np.linspace(0.0, 1.0, 11):
        for a in np.logspace(-3, 3, 13):
            left = AsymptoticsService.poisson_theta(eps, a, ThetaSide.LEFT)
            right = AsymptoticsService.poisson_theta(eps, a, ThetaSide.RIGHT)
            gap = max(gap, abs(left - right) / max(1.0, abs(left)))
    return gap


QUADRATURE_ASPECTS = (0.25, 0.5, 2.0, 4.0)
QUADRATURE_ANGLES = (0.0, math.pi / 4)


def check_form_factor_limits():
    return max(abs(GeometryService.shape_integral(1e8) - 2.0 / 3.0),
               abs(GeometryService.shape_integral(1.0)),
               abs(GeometryService.shape_integral(1e-8) + 4.0 / 3.0))


def check_form_factor_quadrature():
    gap = 0.0
    for aspect in QUADRATURE_ASPECTS:
        for alpha in QUADRATURE_ANGLES:
            geom = CavityGeometry(a=aspect, b=1.0, alpha=alpha)
            closed = GeometryService.form_factor(geom)
            gap = max(gap, abs(GeometryService.form_factor_quadrature(geom) / closed - 1.0))
    return gap


INVERSION_CASES = ((30.0, 10.0, 0.0), (6.0, 12.0, 0.3), (25.0, 20.0, math.pi / 2))
INVERSION_CONCENTRATION = 0.05  # nm^-3
LINESHAPE_SIZES = (2, 5, 9)


def _round_trips():
    for a, b, alpha in INVERSION_CASES:
        geom = CavityGeometry(a=a, b=b, alpha=alpha)
        forward = GeometryService.forward_pulse_observables(geom, INVERSION_CONCENTRATION)
        volume, aspect = GeometryService.invert_measurement(
            forward['period'], forward['width'], INVERSION_CONCENTRATION, alpha,
            coupling_sign=1 if forward['g'] > 0 else -1)
        yield geom, volume, aspect


def check_inversion_volume():
    return max(abs(volume / geom.volume - 1.0) for geom, volume, _ in _round_trips())


def check_inversion_aspect():
    return max(abs(aspect / geom.aspect - 1.0) for geom, _, aspect in _round_trips())


def check_fid_moment():
    return max(abs(LineShapeService.moments_from_fid(n, 1.0)[0] / LineShapeService.moments(n, 1.0)[0] - 1.0)
               for n in LINESHAPE_SIZES)


def _spectra(n, t2=5.0):
    reach = 1.5 * 1.5 * (n - 1)
    omega = np.linspace(-reach, reach, 1201)
    return (LineShapeService.spectrum(n, 1.0, t2, omega, SpectrumRoute.ANALYTIC),
            LineShapeService.spectrum(n, 1.0, t2, omega, SpectrumRoute.NUMERIC))


def check_spectrum_routes():
    gap = 0.0
    for n in LINESHAPE_SIZES:
        analytic, numeric = _spectra(n)
        gap = max(gap, float(np.max(np.abs(analytic.spectrum - numeric.spectrum))))
        gap = max(gap, abs(float(integrate.trapezoid(numeric.spectrum, numeric.omega_grid)) - 1.0))
    return gap


def run_validation(max_n, tolerance, weight_error=0.0, seed=Config.DEFAULT_SEED):
    """Run every check; returns (passed, results) where results lists (check, deviation, tolerance)"""
    if not 2 <= max_n <= MAX_N:
        raise DomainError(f"--max-n must lie in [2, {MAX_N}], got {max_n}")
    rng = np.random.default_rng(seed)
    sizes = range(2, max_n + 1)
    small = range(2, min(max_n, INVARIANCE_MAX_N) + 1)

    checks = [
        ('oracle vs closed form', lambda: check_oracle_equivalence(sizes, weight_error, rng), tolerance),
        ('Clebsch-Gordan vs closed form', lambda: check_cg_equivalence(sizes, weight_error), tolerance),
        ('time averages', lambda: check_time_averages(sizes), 1e-6),
        ('Hamiltonian invariance', lambda: check_invariance(small, tolerance, rng), tolerance),
        ('I^2 multiplicities', lambda: check_multiplicities(small), 0.5),
        ('periodicity and symmetry', lambda: check_symmetry(sizes), 1e-12),
        ('theta identity', check_theta_identity, 1e-12),
        ('form-factor limits', check_form_factor_limits, 1e-6),
        ('form-factor quadrature (relative)', check_form_factor_quadrature, 1e-4),
        ('inversion round trip: volume', check_inversion_volume, 1e-9),
        ('inversion round trip: aspect', check_inversion_aspect, 1e-6),
        ('m2 from the FID', check_fid_moment, 1e-6),
        ('spectrum routes and normalization', check_spectrum_routes, 1e-4),
    ]

    results = []
    passed = True
    for name, check, limit in checks:
        deviation = check()
        results.append((name, deviation, limit))
        if deviation < limit:
            print(f"✓ {name}: max deviation {deviation:.3e} (tolerance {limit:.1e})")
        else:
            passed = False
            failure = ValidationFailure(name, deviation, limit)
            print(f"❌ {failure}")
            logger.error(str(failure))
    return passed, results


def run(args, run_config):
    print(f"🔄 Validating N = 2..{args.max_n} at tolerance {args.tolerance:.1e}...")
    passed, results = run_validation(args.max_n, args.tolerance, args.inject_weight_error, args.seed)
    if passed:
        print("\n✅ All validations passed!")
    else:
        failed = sum(1 for _, deviation, limit in results if deviation >= limit)
        print(f"\n❌ {failed} validation(s) failed")

    if args.out:
        write_json(args.out, {
            'passed': passed,
            'checks': [{'check': name, 'deviation': deviation, 'tolerance': limit}
                       for name, deviation, limit in results],
        }, run_config)
    return 0 if passed else 1
