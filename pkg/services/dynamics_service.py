import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from errors import DomainError, GridError
from models import ClusterSpec, Parity, PolarizationTrace

logger = logging.getLogger(__name__)

EXACT_ARITHMETIC_MAX_N = 60
_CHUNK_ELEMENTS = 2_000_000


def _check_n(n_spins):
    if int(n_spins) != n_spins or n_spins < 2:
        raise DomainError(f"N must be an integer >= 2, got {n_spins}")
    return int(n_spins)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _exact_weight(k, n):
    return Fraction(16, 3 * n * 2 ** n) * DynamicsService.coefficient_a_exact(k, n)


def _log_weight(k, n):
    factor = (n + 1 - 2 * k) * (n - 1 - 2 * k)
    if factor == 0:
        return 0.0
    log_abs = ((4 - n) * math.log(2.0) - math.log(3.0 * n)
               + math.log(abs(factor) / 4.0) + _log_binom(n, k))
    return math.copysign(math.exp(log_abs), factor)


@lru_cache(maxsize=256)
def _spectral_weights(n):
    last_k = n // 2 - 1 if n % 2 == 0 else (n - 1) // 2
    ks = range(0, last_k + 1)
    if n <= EXACT_ARITHMETIC_MAX_N:
        weights = [float(_exact_weight(k, n)) for k in ks]
    else:
        weights = [_log_weight(k, n) for k in ks]
    freqs = [n - 2 * k for k in ks]
    order = sorted(range(len(weights)), key=lambda i: -abs(weights[i]))
    return tuple(freqs[i] for i in order), tuple(weights[i] for i in order)


def compensated_sum(terms):
    """Kahan summation along the last axis"""
    terms = np.asarray(terms, dtype=float)
    total = np.zeros(terms.shape[:-1])
    carry = np.zeros(terms.shape[:-1])
    for j in range(terms.shape[-1]):
        y = terms[..., j] - carry
        s = total + y
        carry = (s - total) - y
        total = s
    return total


class DynamicsService:
    """Closed-form polarization of the first spin under H' = -(g/2) I^2"""

    @staticmethod
    def coefficient_a_exact(k, n_spins):
        n = _check_n(n_spins)
        if not 0 <= k <= n // 2:
            raise DomainError(f"index k={k} outside [0, {n // 2}]")
        return Fraction((n + 1 - 2 * k) * (n - 1 - 2 * k), 4) * math.comb(n, k)

    @staticmethod
    def coefficient_A(k, n_spins):
        n = _check_n(n_spins)
        if not 0 <= k <= n // 2:
            raise DomainError(f"index k={k} outside [0, {n // 2}]")
        if n <= EXACT_ARITHMETIC_MAX_N:
            return float(DynamicsService.coefficient_a_exact(k, n))
        factor = (n + 1 - 2 * k) * (n - 1 - 2 * k)
        if factor == 0:
            return 0.0
        return math.copysign(math.exp(math.log(abs(factor) / 4.0) + _log_binom(n, k)), factor)

    @staticmethod
    def spectral_weights(n_spins):
        """Frequencies N - 2k (in units of tau) and weights 2^(4-N) A_k / 3N, largest first"""
        n = _check_n(n_spins)
        freqs, weights = _spectral_weights(n)
        return np.array(freqs, dtype=float), np.array(weights, dtype=float)

    @staticmethod
    def p1_time_average(n_spins):
        n = _check_n(n_spins)
        if n % 2 == 1:
            return (n + 2) / (3 * n)
        if n <= EXACT_ARITHMETIC_MAX_N:
            return float((Fraction(n + 2) - Fraction(2 * math.comb(n, n // 2), 2 ** n)) / (3 * n))
        central = math.exp((1 - n) * math.log(2.0) + _log_binom(n, n // 2))
        return (n + 2 - central) / (3 * n)

    @staticmethod
    def oscillating_sum(freqs, weights, tau, damping=None):
        """sum_k w_k d_k cos(f_k tau) with compensated summation; damping has shape (len(tau), K)"""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if len(freqs) == 0:
            return np.zeros_like(tau)
        rows = max(1, _CHUNK_ELEMENTS // len(freqs))
        out = np.empty_like(tau)
        for start in range(0, tau.size, rows):
            block = tau[start:start + rows]
            terms = weights * np.cos(np.outer(block, freqs))
            if damping is not None:
                terms = terms * damping[start:start + rows]
            out[start:start + rows] = compensated_sum(terms)
        return out

    @staticmethod
    def p1_oscillating(cluster: ClusterSpec, tau):
        freqs, weights = DynamicsService.spectral_weights(cluster.n_spins)
        values = DynamicsService.oscillating_sum(freqs, weights, tau)
        return float(values[0]) if np.ndim(tau) == 0 else values

    @staticmethod
    def p1_exact(cluster: ClusterSpec, tau):
        freqs, weights = DynamicsService.spectral_weights(cluster.n_spins)
        values = DynamicsService.p1_time_average(cluster.n_spins) + DynamicsService.oscillating_sum(freqs, weights, tau)
        return float(values[0]) if np.ndim(tau) == 0 else values

    @staticmethod
    def p_other(cluster: ClusterSpec, tau):
        return (1.0 - DynamicsService.p1_exact(cluster, tau)) / (cluster.n_spins - 1)

    @staticmethod
    def trace(cluster: ClusterSpec, grid, parameter="tau", workers=1):
        """Sample P1 and the other-spin polarization on a monotone grid of tau or t"""
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise GridError("time grid is empty")
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise GridError("time grid must be strictly monotone")

        if parameter == "t":
            t = grid
            tau = cluster.to_tau(t)
            if cluster.g == 0:
                raise DomainError("g = 0: t-parameterized traces are undefined")
        elif parameter == "tau":
            tau = grid
            t = cluster.to_t(tau) if cluster.g != 0 else None
        else:
            raise DomainError(f"unknown grid parameter {parameter!r}")

        if workers > 1 and tau.size > workers:
            chunks = np.array_split(tau, workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                p1 = np.concatenate(list(pool.map(lambda c: DynamicsService.p1_exact(cluster, c), chunks)))
        else:
            p1 = DynamicsService.p1_exact(cluster, tau)

        p_other = (1.0 - p1) / (cluster.n_spins - 1)
        logger.debug(f"Traced N={cluster.n_spins} ({cluster.parity.value}) over {tau.size} points")
        return PolarizationTrace(tau=tau, p1=p1, p_other=p_other, cluster=cluster, t=t)

    @staticmethod
    def total_polarization(trace: PolarizationTrace):
        return trace.total

    @staticmethod
    def period_tau(n_spins):
        return math.pi if ClusterSpec(n_spins).parity is Parity.EVEN else 2.0 * math.pi
