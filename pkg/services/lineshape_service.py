"""Free induction decay and NMR line shape of an N-spin cavity (dipolar coupling, zeta = 2)."""
import logging
import math

import numpy as np
from scipy import integrate

from errors import DomainError, GridError
from models import LineShape, SpectrumRoute

logger = logging.getLogger(__name__)

GRID_SPAN_FACTOR = 1.2
DECAY_LENGTHS = 40.0
_CHUNK_ELEMENTS = 4_000_000


def _check(n_spins, g):
    if int(n_spins) != n_spins or n_spins < 2:
        raise DomainError(f"N must be an integer >= 2, got {n_spins}")
    if not math.isfinite(g):
        raise DomainError(f"g must be finite, got {g}")
    return int(n_spins)


def _line_frequency(g):
    # G = 3g/2 for the dipolar effective Hamiltonian
    return 1.5 * g


class LineShapeService:

    @staticmethod
    def fid(t, n_spins, g, t2=math.inf):
        """F(t) = cos(3gt/2)^(N-1) e^{-|t|/T2}"""
        n = _check(n_spins, g)
        t_arr = np.asarray(t, dtype=float)
        values = np.cos(_line_frequency(g) * t_arr) ** (n - 1)
        if math.isfinite(t2):
            if not t2 > 0:
                raise DomainError(f"T2 must be positive, got {t2}")
            values = values * np.exp(-np.abs(t_arr) / t2)
        return float(values) if np.ndim(t) == 0 else values

    @staticmethod
    def moments(n_spins, g):
        """Second and fourth moments of the unbroadened line"""
        n = _check(n_spins, g)
        big_g = _line_frequency(g)
        return (n - 1) * big_g ** 2, (n - 1) * (3 * n - 5) * big_g ** 4

    @staticmethod
    def moments_from_fid(n_spins, g):
        """m2 = -F''(0), m4 = F''''(0) by fourth-order central differences of the unbroadened FID"""
        n = _check(n_spins, g)
        scale = abs(_line_frequency(g)) * math.sqrt(n)
        if scale == 0:
            return 0.0, 0.0
        h2 = 1e-3 / scale
        f = [LineShapeService.fid(k * h2, n, g) for k in (-2, -1, 0, 1, 2)]
        second = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h2 * h2)
        h4 = 5e-2 / scale
        f = [LineShapeService.fid(k * h4, n, g) for k in range(-3, 4)]
        fourth = (-f[0] + 12 * f[1] - 39 * f[2] + 56 * f[3] - 39 * f[4] + 12 * f[5] - f[6]) / (6 * h4 ** 4)
        return -second, fourth

    @staticmethod
    def line_comb(n_spins, g):
        """Infinite-T2 spectrum as (positions, weights): weight 2^(1-N) C(N-1, k) at G(N-1-2k)"""
        n = _check(n_spins, g)
        ks = range(n)
        positions = np.array([_line_frequency(g) * (n - 1 - 2 * k) for k in ks])
        weights = np.array([math.comb(n - 1, k) / 2 ** (n - 1) for k in ks])
        return positions, weights

    @staticmethod
    def time_grid(n_spins, g, t2, omega_max=0.0):
        reach = max(abs(omega_max), abs(_line_frequency(g)) * (n_spins - 1))
        dt = t2 / 64.0 if reach == 0 else min(math.pi / (8.0 * reach), t2 / 64.0)
        steps = math.ceil(DECAY_LENGTHS * t2 / dt)
        return np.arange(steps + 1) * dt

    @staticmethod
    def spectrum(n_spins, g, t2, omega_grid, route=SpectrumRoute.ANALYTIC):
        n = _check(n_spins, g)
        if not (math.isfinite(t2) and t2 > 0):
            raise DomainError("spectra need a finite positive T2; use line_comb for the T2 = inf line")
        omega = np.asarray(omega_grid, dtype=float)
        if omega.ndim != 1 or omega.size < 3 or np.any(np.diff(omega) <= 0):
            raise GridError("frequency grid must be strictly increasing with at least 3 points")
        reach = GRID_SPAN_FACTOR * abs(_line_frequency(g)) * (n - 1)
        if omega[0] > -reach or omega[-1] < reach:
            raise GridError(f"frequency grid must cover [-{reach:.6g}, {reach:.6g}] rad/s")

        t_grid = LineShapeService.time_grid(n, g, t2, omega_max=float(np.max(np.abs(omega))))
        fid = LineShapeService.fid(t_grid, n, g, t2)
        width = 1.0 / t2

        if route is SpectrumRoute.ANALYTIC:
            positions, weights = LineShapeService.line_comb(n, g)
            offsets = omega[:, None] - positions[None, :]
            raw = (weights[None, :] * (width / math.pi) / (offsets ** 2 + width ** 2)).sum(axis=1)
        elif route is SpectrumRoute.NUMERIC:
            raw = LineShapeService._cosine_transform(fid, t_grid, omega, t2)
        else:
            raise DomainError(f"unknown spectrum route {route!r}")

        captured = float(integrate.trapezoid(raw, omega))
        spectrum = raw / captured
        m2, m4 = LineShapeService.moments(n, g)
        logger.debug(f"Spectrum N={n} route={route.value}: captured fraction {captured:.6f}")
        return LineShape(t_grid=t_grid, fid=fid, omega_grid=omega, spectrum=spectrum, m2=m2, m4=m4, t2=t2,
                         captured_fraction=captured,
                         metadata={'route': route.value, 'zeta': 2,
                                   'line_frequency': 'G = 3g/2 (dipolar coupling, zeta = 2)'})

    @staticmethod
    def _cosine_transform(fid, t_grid, omega, t2):
        """(1/pi) int_0^inf F(t) cos(w t) dt by trapezoid, with the endpoint correction for F'(0+) = -1/T2"""
        h = t_grid[1] - t_grid[0]
        weights = np.full_like(t_grid, h)
        weights[0] = weights[-1] = 0.5 * h
        weighted = fid * weights
        rows = max(1, _CHUNK_ELEMENTS // t_grid.size)
        out = np.empty_like(omega)
        for start in range(0, omega.size, rows):
            block = omega[start:start + rows]
            out[start:start + rows] = np.cos(np.outer(block, t_grid)) @ weighted
        return (out - h * h / (12.0 * t2)) / math.pi
