"""Large-N pulse profiles and the Gaussian-comb (Poisson-resummed) sums behind them."""
import logging
import math

import numpy as np
from scipy import optimize

from errors import DomainError
from models import ClusterSpec, PulseMetrics, ThetaSide
from services.dynamics_service import DynamicsService

logger = logging.getLogger(__name__)

# -log(1e-16): terms below machine precision are dropped
LOG_CUTOFF = 36.84
COMB_SIGMAS = 16
ASYMPTOTIC_MIN_N = 50


def _comb_range(center, half_width):
    return range(math.floor(center - half_width) - 1, math.ceil(center + half_width) + 2)


def _check_asymptotic_n(n_spins):
    if int(n_spins) != n_spins or n_spins < ASYMPTOTIC_MIN_N:
        raise DomainError(f"asymptotic forms need N >= {ASYMPTOTIC_MIN_N}, got {n_spins}")
    return int(n_spins)


class AsymptoticsService:

    @staticmethod
    def poisson_theta(epsilon, a, side=ThetaSide.LEFT):
        """sum_l cos(2 pi eps l) e^{-a l^2} over all integers l, summed directly or as a Gaussian comb"""
        if not a > 0:
            raise DomainError(f"a must be positive, got {a}")
        if side is ThetaSide.LEFT:
            last = math.ceil(math.sqrt(LOG_CUTOFF / a))
            return 1.0 + 2.0 * math.fsum(math.cos(2.0 * math.pi * epsilon * l) * math.exp(-a * l * l)
                                         for l in range(1, last + 1))
        half_width = math.sqrt(LOG_CUTOFF * a) / math.pi
        terms = (math.exp(-(math.pi * (k + epsilon)) ** 2 / a) for k in _comb_range(-epsilon, half_width))
        return math.sqrt(math.pi / a) * math.fsum(terms)

    @staticmethod
    def theta_partial_sums(omega, a, half_integer=False, method="resummed"):
        """(S1, S2) = sum_{n>0} cos(omega n) e^{-a n^2} * (1, n^2).

        n runs over 1, 2, ... or over 1/2, 3/2, ... when half_integer is set.
        """
        if not a > 0:
            raise DomainError(f"a must be positive, got {a}")
        if method == "direct":
            last = math.ceil(math.sqrt((LOG_CUTOFF + 10.0) / a)) + 2
            ns = [j + 0.5 for j in range(last)] if half_integer else list(range(1, last + 1))
            terms = [math.cos(omega * n) * math.exp(-a * n * n) for n in ns]
            return math.fsum(terms), math.fsum(t * n * n for t, n in zip(terms, ns))
        if method != "resummed":
            raise DomainError(f"unknown summation method {method!r}")

        shift = omega / (2.0 * math.pi)
        s1_parts, s2_parts = [], []
        for q in _comb_range(-shift, math.sqrt(LOG_CUTOFF * a) / math.pi):
            u = q + shift
            x = (math.pi * u) ** 2 / a
            sign = -1.0 if half_integer and q % 2 else 1.0
            e = sign * math.exp(-x)
            s1_parts.append(e)
            s2_parts.append((1.0 - 2.0 * x) * e)
        s1 = 0.5 * math.sqrt(math.pi / a) * math.fsum(s1_parts)
        s2 = math.sqrt(math.pi) / (4.0 * a ** 1.5) * math.fsum(s2_parts)
        if not half_integer:
            # remove the n = 0 term of the full-line sum
            s1 -= 0.5
        return s1, s2

    @staticmethod
    def s1(tau, n_spins):
        return AsymptoticsService.theta_partial_sums(2.0 * tau, 2.0 / n_spins, half_integer=n_spins % 2 == 1)[0]

    @staticmethod
    def s2(tau, n_spins):
        return AsymptoticsService.theta_partial_sums(2.0 * tau, 2.0 / n_spins, half_integer=n_spins % 2 == 1)[1]

    @staticmethod
    def p1_profile_asymptotic(tau, n_spins):
        """1/3 + (2/3) sum_k s_k (1 - pi^2 u^2 N) e^{-pi^2 u^2 N / 2}, u = k + tau/pi; s_k = (-1)^k for odd N"""
        n = _check_asymptotic_n(n_spins)
        tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
        reach = COMB_SIGMAS / (math.pi * math.sqrt(n))
        span = math.ceil(reach) + 1
        nearest = np.rint(-tau_arr / math.pi)
        ks = nearest[:, None] + np.arange(-span, span + 1)[None, :]
        u = ks + tau_arr[:, None] / math.pi
        x = math.pi ** 2 * u * u * n
        terms = (1.0 - x) * np.exp(-0.5 * x)
        terms[np.abs(u) > reach] = 0.0
        if n % 2 == 1:
            terms *= np.where(ks % 2 == 0, 1.0, -1.0)
        values = 1.0 / 3.0 + 2.0 / 3.0 * terms.sum(axis=1)
        return float(values[0]) if np.ndim(tau) == 0 else values

    @staticmethod
    def pulse_metrics(n_spins, g):
        n = _check_asymptotic_n(n_spins)
        if not g > 0:
            raise DomainError(f"g must be positive, got {g}")
        cluster = ClusterSpec(n, g)
        odd = n % 2 == 1
        plateau = DynamicsService.p1_time_average(n)
        half = 0.5 * (1.0 - plateau)

        def excess_gap(tau):
            return DynamicsService.p1_exact(cluster, tau) - plateau - half

        upper = 1.0 / math.sqrt(n)
        while excess_gap(upper) > 0:
            upper *= 1.5
            if upper > math.pi / 2:
                raise DomainError(f"no half-maximum crossing found for N={n}")
        tau_half = optimize.bisect(excess_gap, 0.0, upper, xtol=1e-14, maxiter=200)

        metrics = PulseMetrics(
            period_t=2.0 * math.pi / g,
            full_period_t=(4.0 if odd else 2.0) * math.pi / g,
            width_t=(4.0 if odd else 2.0) * math.pi / (g * math.sqrt(n)),
            fwhm_t=2.0 * cluster.to_t(tau_half).item(),
            plateau_value=plateau,
        )
        logger.debug(f"Pulse metrics N={n}: fwhm={metrics.fwhm_t:.6g}s, plateau={plateau:.9g}")
        return metrics
