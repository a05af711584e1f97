import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import integrate, signal

from errors import DomainError, GridError, QuadratureError, StepSizeError
from models import ClusterSpec, EnvelopeRegime, Kernel, MonteCarloResult, NoiseModel
from services.asymptotics_service import ASYMPTOTIC_MIN_N, AsymptoticsService
from services.dynamics_service import DynamicsService

logger = logging.getLogger(__name__)

SMALL_RATIO = 1e-3
MAX_STEP_FRACTION = 0.1
# |P1 - plateau| below this is swamped by rare realizations
RESOLVABLE_EXCESS = 1e-6
AGREEMENT_SLACK = 1e-12


class NoiseService:
    """Polarization of the first spin when the coupling fluctuates as Gaussian noise around <g>"""

    @staticmethod
    def t_squared(t, model: NoiseModel):
        """T^2(t) = int_0^t (t - s) gamma(s) ds"""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < 0):
            raise DomainError("T^2 is defined for t >= 0")

        if model.kernel is Kernel.EXPONENTIAL:
            x = t_arr / model.t_c
            # t_c^2 (x - 1 + e^-x); the series avoids cancellation for x -> 0
            series = x * x * (0.5 - x / 6.0 + x * x / 24.0 - x ** 3 / 120.0)
            values = np.where(x < SMALL_RATIO, series, x + np.expm1(-x)) * model.t_c ** 2
        else:
            values = np.array([NoiseService._t_squared_quad(x, model) for x in t_arr])
        return float(values[0]) if np.ndim(t) == 0 else values

    @staticmethod
    def _t_squared_quad(t, model):
        if t == 0:
            return 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(lambda s: (t - s) * model.gamma(s), 0.0, t,
                                          epsabs=0.0, epsrel=1e-10, limit=200)
            except integrate.IntegrationWarning as e:
                raise QuadratureError(f"T^2 quadrature failed at t={t}: {e}") from e
        return value

    @staticmethod
    def damping(n_spins, t, model: NoiseModel):
        """exp(-((N - 2k)/2)^2 <dg^2> T^2) per frequency, shape (len(t), K)"""
        freqs, _ = DynamicsService.spectral_weights(n_spins)
        t_sq = np.atleast_1d(NoiseService.t_squared(t, model))
        return np.exp(-np.outer(model.variance * t_sq, (0.5 * freqs) ** 2))

    @staticmethod
    def p1_noise_analytic(n_spins, t, model: NoiseModel):
        freqs, weights = DynamicsService.spectral_weights(n_spins)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tau = 0.5 * model.mean_g * t_arr
        damping = NoiseService.damping(n_spins, t_arr, model)
        values = (DynamicsService.p1_time_average(n_spins)
                  + DynamicsService.oscillating_sum(freqs, weights, tau, damping))
        return float(values[0]) if np.ndim(t) == 0 else values

    @staticmethod
    def is_approx_reliable(n_spins):
        return n_spins >= ASYMPTOTIC_MIN_N

    @staticmethod
    def width_parameter(n_spins, t, model: NoiseModel, drop_finite_size=False):
        """a = 2/N + <dg^2> T^2"""
        base = 0.0 if drop_finite_size else 2.0 / n_spins
        return base + model.variance * NoiseService.t_squared(t, model)

    @staticmethod
    def p1_noise_gaussian_approx(n_spins, t, model: NoiseModel, method="direct"):
        """1/3 + 16/(3 N^{3/2} sqrt(pi/2)) sum_n (n^2 - 1/4) cos(<g> t n) e^{-a n^2}.

        method="direct" sums over n; "poisson" uses the resummed S2 - S1/4.
        """
        if not NoiseService.is_approx_reliable(n_spins):
            logger.warning(f"Gaussian approximation is unreliable for N={n_spins} < {ASYMPTOTIC_MIN_N}")
        odd = n_spins % 2 == 1
        prefactor = 16.0 / (3.0 * n_spins ** 1.5 * math.sqrt(math.pi / 2.0))
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        a_arr = np.atleast_1d(NoiseService.width_parameter(n_spins, t_arr, model))

        values = np.empty_like(t_arr)
        for i, (x, a) in enumerate(zip(t_arr, a_arr)):
            if method == "poisson":
                s1, s2 = AsymptoticsService.theta_partial_sums(model.mean_g * x, a, half_integer=odd)
            elif method == "direct":
                s1, s2 = AsymptoticsService.theta_partial_sums(model.mean_g * x, a, half_integer=odd,
                                                               method="direct")
            else:
                raise DomainError(f"unknown summation method {method!r}")
            values[i] = 1.0 / 3.0 + prefactor * (s2 - 0.25 * s1)
        return float(values[0]) if np.ndim(t) == 0 else values

    @staticmethod
    def envelope_exponent(n_spins, m, model: NoiseModel, regime=EnvelopeRegime.AUTO, drop_finite_size=False):
        """a at the m-th peak t = 2 pi m / <g>"""
        if regime is EnvelopeRegime.AUTO:
            long = model.t_c ** 2 * model.variance >= 1.0
            regime = EnvelopeRegime.LONG_CORRELATION if long else EnvelopeRegime.SHORT_CORRELATION
        t_peak = 2.0 * math.pi * m / model.mean_g
        if regime is EnvelopeRegime.LONG_CORRELATION:
            noise = model.variance * t_peak ** 2 / 2.0
        elif regime is EnvelopeRegime.SHORT_CORRELATION:
            noise = model.variance * model.t_c * t_peak
        else:
            noise = model.variance * NoiseService.t_squared(t_peak, model)
        return noise + (0.0 if drop_finite_size else 2.0 / n_spins)

    @staticmethod
    def peak_envelope(n_spins, m, model: NoiseModel, regime=EnvelopeRegime.AUTO, drop_finite_size=False):
        """Height of the m-th peak: 1/3 +- 4 sqrt(2) / (N^{3/2} sqrt(pi)) e^{-a}"""
        if int(m) != m or m < 1:
            raise DomainError(f"peak index must be an integer >= 1, got {m}")
        if model.mean_g == 0:
            raise DomainError("<g> = 0 has no peak train")
        if not NoiseService.is_approx_reliable(n_spins):
            logger.warning(f"Peak envelope is unreliable for N={n_spins} < {ASYMPTOTIC_MIN_N}")
        a = NoiseService.envelope_exponent(n_spins, m, model, regime, drop_finite_size)
        correction = 4.0 * math.sqrt(2.0) / (n_spins ** 1.5 * math.sqrt(math.pi)) * math.exp(-a)
        # odd N: peaks alternate, maximum at even m and minimum at odd m
        sign = -1.0 if n_spins % 2 == 1 and m % 2 == 1 else 1.0
        return 1.0 / 3.0 + sign * correction

    @staticmethod
    def ou_path(n_steps, h, model: NoiseModel, rng):
        """Stationary Ornstein-Uhlenbeck path dg(t_k), k = 0..n_steps, on a uniform step h"""
        if model.kernel is not Kernel.EXPONENTIAL:
            raise DomainError("only the exponential kernel has an Ornstein-Uhlenbeck realization")
        rho = math.exp(-h / model.t_c)
        innovations = rng.standard_normal(n_steps + 1)
        innovations[0] *= math.sqrt(model.variance)
        innovations[1:] *= math.sqrt(model.variance * -math.expm1(-2.0 * h / model.t_c))
        return signal.lfilter([1.0], [1.0, -rho], innovations)

    @staticmethod
    def _ou_on_grid(t, model, rng):
        steps = np.diff(t)
        if np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
            return NoiseService.ou_path(len(steps), float(steps[0]), model, rng)
        path = np.empty_like(t)
        path[0] = math.sqrt(model.variance) * rng.standard_normal()
        noise = rng.standard_normal(len(steps))
        for k, h in enumerate(steps):
            rho = math.exp(-h / model.t_c)
            path[k + 1] = rho * path[k] + math.sqrt(model.variance * -math.expm1(-2.0 * h / model.t_c)) * noise[k]
        return path

    @staticmethod
    def monte_carlo(n_spins, grid, model: NoiseModel, n_realizations, seed, workers=1):
        """Average P1 over OU realizations of dg(t); per-realization substreams make the result worker-independent"""
        if n_realizations < 2:
            raise DomainError(f"need at least 2 realizations, got {n_realizations}")
        if model.kernel is not Kernel.EXPONENTIAL:
            raise DomainError("Monte Carlo supports the exponential kernel only")
        t = np.asarray(grid, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise GridError("time grid is empty")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise GridError("time grid must start at t >= 0 and increase strictly")

        padded = t if t[0] == 0 else np.concatenate(([0.0], t))
        offset = padded.size - t.size
        if padded.size > 1 and np.max(np.diff(padded)) > MAX_STEP_FRACTION * model.t_c:
            raise StepSizeError(
                f"grid step {np.max(np.diff(padded)):.3g}s exceeds t_c/10 = {MAX_STEP_FRACTION * model.t_c:.3g}s")

        cluster = ClusterSpec(n_spins, model.mean_g)

        def realize(index):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
            dg = NoiseService._ou_on_grid(padded, model, rng) if padded.size > 1 else np.zeros(1)
            phase = 0.5 * integrate.cumulative_trapezoid(model.mean_g + dg, padded, initial=0.0)
            return DynamicsService.p1_exact(cluster, phase[offset:])

        logger.info(f"Monte Carlo N={n_spins}: {n_realizations} realizations x {t.size} points, "
                    f"{workers} worker(s), seed={seed}")
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            samples = np.stack(list(pool.map(realize, range(n_realizations))))

        mean = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / math.sqrt(n_realizations)
        return MonteCarloResult(t=t, mean=mean, stderr=stderr, n_realizations=n_realizations,
                                seed=seed, cluster=cluster)

    @staticmethod
    def monte_carlo_agreement(result: MonteCarloResult, analytic, n_sigma=3.0):
        """Fraction of resolvable grid points where the Monte Carlo mean lies within n_sigma standard errors.

        Points whose analytic excess over the plateau is below RESOLVABLE_EXCESS are left out.
        """
        analytic = np.asarray(analytic, dtype=float)
        plateau = DynamicsService.p1_time_average(result.cluster.n_spins)
        resolvable = np.abs(analytic - plateau) > RESOLVABLE_EXCESS
        if not np.any(resolvable):
            return 1.0
        within = np.abs(result.mean - analytic) <= n_sigma * result.stderr + AGREEMENT_SLACK
        return float(np.mean(within[resolvable]))
