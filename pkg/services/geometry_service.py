import logging
import math
import warnings

from scipy import integrate, optimize

from errors import DegenerateGeometryError, DomainError, NoSolutionError, QuadratureError
from models import CavityGeometry, GasSpec

logger = logging.getLogger(__name__)

# CGS-Gaussian constants
HBAR = 1.054571817e-27  # erg s
PROTON_GAMMA = 2.6752218744e4  # rad s^-1 G^-1
NM3_TO_CM3 = 1e-21

SERIES_SWITCH = 1e-4
SERIES_TERMS = 8
MAGIC_ANGLE_TOLERANCE = 1e-6
ASPECT_BRACKET = (1e-6, 1e6)


class GeometryService:
    """Form-factor and coupling of an ellipsoidal nano-cavity, and the inverse problem"""

    @staticmethod
    def legendre_p2(x):
        if abs(x) > 1.0 + 1e-12:
            raise DomainError(f"P2 argument must lie in [-1, 1], got {x}")
        return 0.5 * (3.0 * x * x - 1.0)

    @staticmethod
    def shape_series(eps2):
        """I = sum_k 4 eps^2k / ((2k+1)(2k+3)); converges for |eps2| < 1"""
        total = 0.0
        power = 1.0
        for k in range(1, SERIES_TERMS + 1):
            power *= eps2
            total += 4.0 * power / ((2 * k + 1) * (2 * k + 3))
        return total

    @staticmethod
    def shape_integral(aspect):
        """Dimensionless shape integral I(a/b), in (-4/3, 2/3]"""
        if not aspect > 0:
            raise DomainError(f"aspect ratio must be positive, got {aspect}")
        q = 1.0 / aspect  # b/a
        # (a/b - 1)(a/b + 1) keeps eps2 accurate near the sphere
        eps2 = (aspect - 1.0) * (aspect + 1.0) * q * q
        if abs(eps2) < SERIES_SWITCH:
            return GeometryService.shape_series(eps2)
        if aspect > 1.0:
            eps = math.sqrt(eps2)
            # log((1 + eps)/q) equals arcth(eps) and stays finite as eps -> 1
            arcth = math.atanh(eps) if eps < 0.5 else math.log((1.0 + eps) / q)
            return 2.0 / 3.0 + 2.0 / ((aspect - 1.0) * (aspect + 1.0)) * (1.0 - arcth / eps)
        abs_eps = math.sqrt(-eps2)
        return 2.0 / 3.0 - 2.0 * (1.0 / (-eps2) + 1.0) * (1.0 - math.atan(abs_eps) / abs_eps)

    @staticmethod
    def form_factor(geom: CavityGeometry):
        p2 = GeometryService.legendre_p2(math.cos(geom.alpha))
        return math.pi * GeometryService.shape_integral(geom.aspect) * p2

    @staticmethod
    def form_factor_quadrature(geom: CavityGeometry, r_min=None):
        """Direct quadrature of the P2 r^-3 integral with an inner cut-off radius.

        Lengths are scaled by b; the cut-off drops out because P2 integrates
        to zero over the polar angle.
        """
        eps2 = 1.0 - (geom.b / geom.a) ** 2
        if r_min is None:
            r_min = 1e-3 * min(1.0, geom.aspect)

        def surface(theta):
            return 1.0 / math.sqrt(1.0 - eps2 * math.cos(theta) ** 2)

        def integrand(r, theta):
            c = math.cos(theta)
            return math.sin(theta) * 0.5 * (3.0 * c * c - 1.0) / r

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, error = integrate.dblquad(integrand, 0.0, math.pi, lambda _: r_min, surface,
                                                 epsabs=1e-10, epsrel=1e-10)
            except integrate.IntegrationWarning as e:
                raise QuadratureError(f"form-factor quadrature failed: {e}") from e
        logger.debug(f"form-factor quadrature a/b={geom.aspect:.4g}: {value:.12g} +- {error:.1e}")
        return 2.0 * math.pi * value * GeometryService.legendre_p2(math.cos(geom.alpha))

    @staticmethod
    def coupling_g(geom: CavityGeometry, gas=PROTON_GAMMA):
        """g = gamma^2 hbar F / V in rad/s; V converted from nm^3 to cm^3.

        gas is a GasSpec or a bare gyromagnetic ratio.
        """
        gamma = gas.gamma if isinstance(gas, GasSpec) else gas
        volume_cm3 = geom.volume * NM3_TO_CM3
        return gamma * gamma * HBAR * GeometryService.form_factor(geom) / volume_cm3

    @staticmethod
    def forward_pulse_observables(geom: CavityGeometry, concentration, gamma=PROTON_GAMMA):
        """Pulse period and width that a cavity with N = c V spins would show"""
        g = GeometryService.coupling_g(geom, gamma)
        if g == 0:
            raise DegenerateGeometryError("g = 0: no pulses to observe (sphere or magic angle)")
        n_spins = concentration * geom.volume
        period = 2.0 * math.pi / abs(g)
        width = 4.0 * math.pi / (abs(g) * math.sqrt(n_spins))
        return {'g': g, 'period': period, 'width': width, 'n_spins': n_spins}

    @staticmethod
    def invert_measurement(period, width, concentration, alpha, gamma=PROTON_GAMMA, coupling_sign=1):
        """Recover (V in nm^3, a/b) from the pulse period and width.

        The sign of g is not visible in T and width; coupling_sign selects it.
        """
        if not (period > 0 and width > 0 and concentration > 0):
            raise DomainError("period, width and concentration must be positive")
        if period / width <= 1.0:
            raise DomainError(f"T/width must exceed 1, got {period / width}")
        if coupling_sign not in (1, -1):
            raise DomainError(f"coupling_sign must be +1 or -1, got {coupling_sign}")

        p2 = GeometryService.legendre_p2(math.cos(alpha))
        if abs(p2) < MAGIC_ANGLE_TOLERANCE:
            raise DegenerateGeometryError(f"alpha={alpha} is at the magic angle: shape unidentifiable")

        volume = 4.0 / concentration * (period / width) ** 2
        concentration_cm3 = concentration / NM3_TO_CM3
        target = coupling_sign * 8.0 * period / (concentration_cm3 * gamma * gamma * HBAR * width * width) / p2

        lo, hi = ASPECT_BRACKET
        i_lo = GeometryService.shape_integral(lo)
        i_hi = GeometryService.shape_integral(hi)
        if not i_lo <= target <= i_hi:
            raise NoSolutionError(
                f"shape integral {target:.6g} outside attainable range [{i_lo:.6g}, {i_hi:.6g}]")

        aspect = optimize.bisect(lambda x: GeometryService.shape_integral(x) - target, lo, hi,
                                 xtol=1e-12, rtol=4 * 2.0 ** -52, maxiter=400)
        logger.info(f"Inverted T={period:.6g}s width={width:.6g}s -> V={volume:.6g} nm^3, a/b={aspect:.9g}")
        return volume, aspect
