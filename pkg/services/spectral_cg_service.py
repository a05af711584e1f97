"""Second evaluation path for P1(tau): Clebsch-Gordan coupling of spin 1 to the fragment of spins 2..N.

Half-integer quantum numbers are carried as doubled integers (two_ib = 2 I_B, two_m = 2 m, ...).
"""
import logging
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np

from errors import DomainError
from models import CouplingTable, MultiplicityTable

logger = logging.getLogger(__name__)

MAX_N = 24


def _check_cluster(n_spins):
    if int(n_spins) != n_spins or not 2 <= n_spins <= MAX_N:
        raise DomainError(f"Clebsch-Gordan path supports 2 <= N <= {MAX_N}, got {n_spins}")
    return int(n_spins)


def _allowed_two_i(two_ib):
    return [1] if two_ib == 0 else [two_ib - 1, two_ib + 1]


def _energy(two_i):
    # I(I+1) with I = two_i / 2
    return two_i * (two_i + 2) / 4.0


class SpectralCGService:

    @staticmethod
    def cg(two_m_a, two_ib, two_i, two_m):
        """C^{I,m}_{1/2,m_A; I_B,m-m_A}; Condon-Shortley phase with the fragment coupled first"""
        if two_m_a not in (1, -1):
            raise DomainError(f"m_A must be +-1/2, got {two_m_a}/2")
        if two_ib < 0:
            raise DomainError(f"I_B must be non-negative, got {two_ib}/2")
        if two_i not in _allowed_two_i(two_ib):
            raise DomainError(f"I={two_i}/2 cannot couple from I_B={two_ib}/2")
        if abs(two_m) > two_i or (two_m - two_i) % 2:
            raise DomainError(f"m={two_m}/2 invalid for I={two_i}/2")

        two_m_b = two_m - two_m_a
        if abs(two_m_b) > two_ib:
            return 0.0
        denom = 2.0 * (two_ib + 1)
        if two_i == two_ib + 1:
            return math.sqrt((two_ib + 1 + two_m_a * two_m) / denom)
        if two_m_a == 1:
            return -math.sqrt((two_ib + 1 - two_m) / denom)
        return math.sqrt((two_ib + 1 + two_m) / denom)

    @staticmethod
    def coupling_table(two_ib):
        entries = {}
        for two_i in _allowed_two_i(two_ib):
            for two_m in range(-two_i, two_i + 1, 2):
                for two_m_a in (1, -1):
                    entries[(two_m_a, two_i, two_m)] = SpectralCGService.cg(two_m_a, two_ib, two_i, two_m)
        return CouplingTable(two_ib=two_ib, entries=entries)

    @staticmethod
    def multiplicity_w(two_ib, n_fragment):
        """Number of ways N_B spins-1/2 combine into total spin I_B"""
        if n_fragment < 1 or two_ib < 0 or two_ib > n_fragment or (n_fragment - two_ib) % 2:
            raise DomainError(f"I_B={two_ib}/2 not reachable with N_B={n_fragment}")
        top = (n_fragment + two_ib) // 2 + 1
        return (two_ib + 1) * math.comb(n_fragment + 1, top) // (n_fragment + 1)

    @staticmethod
    def multiplicity_table(n_fragment):
        counts = {two_ib: SpectralCGService.multiplicity_w(two_ib, n_fragment)
                  for two_ib in range(n_fragment % 2, n_fragment + 1, 2)}
        return MultiplicityTable(n_fragment=n_fragment, counts=counts)

    @staticmethod
    def partial_sum_rule(n_fragment, two_m_b):
        """(sum_{I_B >= |m_B|} w(I_B), C(N_B, N_B/2 + m_B))"""
        table = SpectralCGService.multiplicity_table(n_fragment)
        lhs = sum(w for two_ib, w in table.counts.items() if two_ib >= abs(two_m_b))
        return lhs, math.comb(n_fragment, (n_fragment + two_m_b) // 2)

    @staticmethod
    def mu_sum(two_ib):
        """(sum_mu (2mu+1)^2, (2I_B+1)(1 + 4/3 I_B(I_B+1)))"""
        lhs = sum((two_mu + 1) ** 2 for two_mu in range(-two_ib, two_ib + 1, 2))
        rhs = (two_ib + 1) * (1 + Fraction(two_ib * (two_ib + 2), 3))
        return Fraction(lhs), rhs

    @staticmethod
    def matrix_element(two_ib, two_i_prime, two_i, two_m):
        """<I_B, I', m| I_1z |I_B, I, m>"""
        return sum(0.5 * two_m_a
                   * SpectralCGService.cg(two_m_a, two_ib, two_i_prime, two_m)
                   * SpectralCGService.cg(two_m_a, two_ib, two_i, two_m)
                   for two_m_a in (1, -1))

    @staticmethod
    def spectral_components(n_spins):
        """Map frequency I(I+1) - I'(I'+1) -> summed coefficient of the full four-pair sum"""
        n = _check_cluster(n_spins)
        n_fragment = n - 1
        norm = 2.0 ** -(n_fragment - 1)
        table = SpectralCGService.multiplicity_table(n_fragment)
        components = defaultdict(list)
        for two_ib, w in table.counts.items():
            for two_i in _allowed_two_i(two_ib):
                for two_i_prime in _allowed_two_i(two_ib):
                    bound = min(two_i, two_i_prime)
                    freq = _energy(two_i) - _energy(two_i_prime)
                    for two_m in range(-bound, bound + 1, 2):
                        element = SpectralCGService.matrix_element(two_ib, two_i_prime, two_i, two_m)
                        components[freq].append(norm * w * element * element)
        return {freq: math.fsum(parts) for freq, parts in components.items()}

    @staticmethod
    def p1_via_cg(n_spins, tau):
        components = SpectralCGService.spectral_components(n_spins)
        tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
        # the (I, I') and (I', I) terms are complex conjugates: only the cosine survives
        values = np.array([math.fsum(c * math.cos(f * x) for f, c in components.items()) for x in tau_arr])
        return float(values[0]) if np.ndim(tau) == 0 else values

    @staticmethod
    def stationary_part(n_spins):
        """Diagonal I = I' terms of the four-pair sum"""
        n = _check_cluster(n_spins)
        n_fragment = n - 1
        table = SpectralCGService.multiplicity_table(n_fragment)
        parts = []
        for two_ib, w in table.counts.items():
            for two_i in _allowed_two_i(two_ib):
                for two_m in range(-two_i, two_i + 1, 2):
                    element = SpectralCGService.matrix_element(two_ib, two_i, two_i, two_m)
                    parts.append(w * element * element)
        return 2.0 ** -(n_fragment - 1) * math.fsum(parts)

    @staticmethod
    def oscillating_part_cg(n_spins, tau):
        """Off-diagonal pair (I_B + 1/2, I_B - 1/2) doubled, before the m-summation"""
        n = _check_cluster(n_spins)
        n_fragment = n - 1
        table = SpectralCGService.multiplicity_table(n_fragment)
        tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
        total = np.zeros_like(tau_arr)
        for two_ib, w in table.counts.items():
            if two_ib == 0:
                continue
            squares = math.fsum(SpectralCGService.matrix_element(two_ib, two_ib - 1, two_ib + 1, two_m) ** 2
                                for two_m in range(-(two_ib - 1), two_ib, 2))
            total += 2.0 * w * squares * np.cos(tau_arr * (two_ib + 1))
        total *= 2.0 ** -(n_fragment - 1)
        return float(total[0]) if np.ndim(tau) == 0 else total

    @staticmethod
    def oscillating_part_closed(n_spins, tau):
        """Same sum after the m, m' summation: binomial weights times I_B(I_B+1)"""
        n = _check_cluster(n_spins)
        n_fragment = n - 1
        tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
        total = np.zeros_like(tau_arr)
        prefactor = 2.0 ** (3 - n_fragment) / (3.0 * (n_fragment + 1))
        for two_ib in range(n_fragment % 2, n_fragment + 1, 2):
            if two_ib == 0:
                continue
            binom = math.comb(n_fragment + 1, (n_fragment + two_ib) // 2 + 1)
            total += prefactor * binom * (two_ib * (two_ib + 2) / 4.0) * np.cos(tau_arr * (two_ib + 1))
        return float(total[0]) if np.ndim(tau) == 0 else total
