import math

import numpy as np
import pytest

from errors import DomainError, GridError, StepSizeError
from models import ClusterSpec, EnvelopeRegime, Kernel, MonteCarloResult, NoiseModel
from services.dynamics_service import DynamicsService
from services.noise_service import NoiseService


def _exp_kernel(t_c):
    return lambda t: math.exp(-t / t_c)


def test_t_squared_limits():
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=2.0)
    short = 2.0 * 1e-4
    assert NoiseService.t_squared(short, model) == pytest.approx(short ** 2 / 2, rel=1e-6)
    long = 2.0 * 1e4
    assert NoiseService.t_squared(long, model) == pytest.approx(2.0 * long, rel=1e-3)
    assert NoiseService.t_squared(0.0, model) == 0.0


def test_t_squared_custom_kernel_matches_closed_form():
    closed = NoiseModel(mean_g=1.0, variance=1e-4, t_c=2.0)
    custom = NoiseModel(mean_g=1.0, variance=1e-4, t_c=2.0, kernel=Kernel.CUSTOM, correlation=_exp_kernel(2.0))
    for t in (0.0, 0.5, 1.0, 6.0):
        assert NoiseService.t_squared(t, custom) == pytest.approx(NoiseService.t_squared(t, closed), rel=1e-9, abs=1e-15)


def test_noise_model_validation():
    with pytest.raises(DomainError):
        NoiseModel(mean_g=1.0, variance=-1.0, t_c=1.0)
    with pytest.raises(DomainError):
        NoiseModel(mean_g=1.0, variance=1.0, t_c=0.0)
    with pytest.raises(DomainError):
        NoiseModel(mean_g=1.0, variance=1.0, t_c=1.0, kernel=Kernel.CUSTOM, correlation=lambda t: 0.5)
    with pytest.raises(DomainError):
        NoiseModel(mean_g=1.0, variance=1.0, t_c=1.0, kernel=Kernel.CUSTOM, correlation=lambda t: 1.0 + t)
    assert NoiseModel(mean_g=1.0, variance=1.0, t_c=1.0, kernel=Kernel.CUSTOM, correlation=math.cos).t_c == 1.0
    with pytest.raises(DomainError):
        NoiseService.t_squared(-1.0, NoiseModel(mean_g=1.0, variance=1.0, t_c=1.0))


def test_noiseless_reduction():
    model = NoiseModel(mean_g=1.7, variance=0.0, t_c=3.0)
    t = np.random.default_rng(11).uniform(0.0, 40.0, 50)
    for n in (5, 20, 134):
        exact = DynamicsService.p1_exact(ClusterSpec(n), 0.5 * model.mean_g * t)
        assert np.max(np.abs(NoiseService.p1_noise_analytic(n, t, model) - exact)) < 1e-12


def test_late_times_reach_the_plateau():
    model = NoiseModel(mean_g=1.0, variance=1e-2, t_c=1.0)
    for n in (20, 21):
        value = NoiseService.p1_noise_analytic(n, 1e4, model)
        assert value == pytest.approx(DynamicsService.p1_time_average(n), abs=1e-12)


def test_damping_is_monotone():
    model = NoiseModel(mean_g=1.0, variance=1e-3, t_c=5.0)
    damping = NoiseService.damping(30, np.linspace(0.0, 100.0, 500), model)
    assert np.all(np.diff(damping, axis=0) <= 0)


def test_gaussian_approximation_tracks_exact_sum_at_peaks():
    n = 200
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=1e3)
    peaks = 2 * math.pi * np.arange(0, 6)
    gap = np.abs(NoiseService.p1_noise_gaussian_approx(n, peaks, model) - NoiseService.p1_noise_analytic(n, peaks, model))
    assert np.max(gap) < 2 / math.sqrt(n)


def test_gaussian_approximation_limits():
    n = 200
    quiet = NoiseModel(mean_g=1.0, variance=0.0, t_c=1.0)
    assert NoiseService.p1_noise_gaussian_approx(n, 0.0, quiet) == pytest.approx(1.0, abs=2.0 / n)
    noisy = NoiseModel(mean_g=1.0, variance=1e-2, t_c=1.0)
    assert NoiseService.p1_noise_gaussian_approx(n, 1e4, noisy) == pytest.approx(1.0 / 3.0, abs=1e-6)


@pytest.mark.parametrize("n", [200, 201])
def test_gaussian_approximation_summation_routes_agree(n):
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=10.0)
    t = np.array([0.0, 0.7, 2 * math.pi, 13.0, 40.0])
    direct = NoiseService.p1_noise_gaussian_approx(n, t, model, method="direct")
    poisson = NoiseService.p1_noise_gaussian_approx(n, t, model, method="poisson")
    assert np.max(np.abs(direct - poisson)) < 1e-10


def test_envelope_decays_to_one_third():
    model = NoiseModel(mean_g=1.0, variance=1e-2, t_c=1e3)
    assert NoiseService.peak_envelope(100, 30, model) == pytest.approx(1.0 / 3.0, abs=1e-9)


def _log_excess_fit(model, degree):
    m = np.arange(2, 31)
    excess = np.array([NoiseService.peak_envelope(400, k, model) for k in m]) - 1.0 / 3.0
    y = np.log(excess)
    fit = np.polyval(np.polyfit(m, y, degree), m)
    return 1.0 - np.sum((y - fit) ** 2) / np.sum((y - y.mean()) ** 2)


def test_envelope_regimes():
    # long correlation time: quadratic in m
    assert _log_excess_fit(NoiseModel(mean_g=1.0, variance=1e-4, t_c=1e3), 2) > 0.999
    # short correlation time: linear in m
    assert _log_excess_fit(NoiseModel(mean_g=1.0, variance=1e-2, t_c=1e-2), 1) > 0.999


def test_envelope_dropping_finite_size_term():
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=1e3)
    kept = NoiseService.envelope_exponent(400, 3, model)
    dropped = NoiseService.envelope_exponent(400, 3, model, drop_finite_size=True)
    assert kept - dropped == pytest.approx(2.0 / 400)
    assert NoiseService.envelope_exponent(400, 3, model, EnvelopeRegime.EXACT) == pytest.approx(kept, rel=1e-2)


def test_envelope_matches_gaussian_approximation():
    n = 400
    model = NoiseModel(mean_g=1.0, variance=5e-3, t_c=1e6)
    for m in range(5, 13):
        t = 2 * math.pi * m
        envelope = NoiseService.peak_envelope(n, m, model, EnvelopeRegime.EXACT)
        approx = NoiseService.p1_noise_gaussian_approx(n, t, model)
        assert abs(envelope - approx) / approx < 0.05
        assert (envelope - 1.0 / 3.0) == pytest.approx(approx - 1.0 / 3.0, rel=0.05)


def test_odd_envelope_alternates():
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=1e3)
    assert NoiseService.peak_envelope(401, 1, model) < 1.0 / 3.0
    assert NoiseService.peak_envelope(401, 2, model) > 1.0 / 3.0
    with pytest.raises(DomainError):
        NoiseService.peak_envelope(401, 0, model)


def test_ou_autocovariance():
    model = NoiseModel(mean_g=1.0, variance=1.0, t_c=1.0)
    h = 0.1
    path = NoiseService.ou_path(200_000, h, model, np.random.default_rng(5))
    for lag_steps in (0, 10, 20):
        lagged = np.mean(path[:path.size - lag_steps] * path[lag_steps:])
        assert lagged == pytest.approx(math.exp(-lag_steps * h), abs=0.06)


def test_monte_carlo_without_noise_is_deterministic():
    model = NoiseModel(mean_g=1.0, variance=0.0, t_c=10.0)
    t = np.linspace(0.0, 12.0, 241)
    result = NoiseService.monte_carlo(20, t, model, n_realizations=3, seed=1)
    expected = DynamicsService.p1_exact(ClusterSpec(20), 0.5 * t)
    assert np.max(np.abs(result.mean - expected)) < 1e-12
    assert np.max(result.stderr) < 1e-15
    assert result.as_trace().max_conservation_error() < 1e-12


def test_monte_carlo_is_worker_independent():
    model = NoiseModel(mean_g=1.0, variance=1e-3, t_c=5.0)
    t = np.linspace(0.1, 10.0, 100)
    single = NoiseService.monte_carlo(30, t, model, n_realizations=8, seed=42, workers=1)
    pooled = NoiseService.monte_carlo(30, t, model, n_realizations=8, seed=42, workers=4)
    assert np.array_equal(single.mean, pooled.mean)
    assert np.array_equal(single.stderr, pooled.stderr)


def test_monte_carlo_preconditions():
    model = NoiseModel(mean_g=1.0, variance=1e-3, t_c=1.0)
    with pytest.raises(StepSizeError):
        NoiseService.monte_carlo(10, np.linspace(0.0, 10.0, 11), model, 4, seed=0)
    with pytest.raises(GridError):
        NoiseService.monte_carlo(10, [-1.0, 0.0], model, 4, seed=0)
    with pytest.raises(DomainError):
        NoiseService.monte_carlo(10, [0.0, 0.05], model, 1, seed=0)
    custom = NoiseModel(mean_g=1.0, variance=1e-3, t_c=1.0, kernel=Kernel.CUSTOM, correlation=_exp_kernel(1.0))
    with pytest.raises(DomainError):
        NoiseService.monte_carlo(10, [0.0, 0.05], custom, 4, seed=0)


@pytest.mark.slow
def test_monte_carlo_agrees_with_analytic_average():
    n = 134
    model = NoiseModel(mean_g=1.0, variance=1e-4, t_c=50.0)
    t = np.linspace(0.0, 20 * math.pi, 1257)
    result = NoiseService.monte_carlo(n, t, model, n_realizations=2000, seed=2003, workers=4)
    analytic = NoiseService.p1_noise_analytic(n, t, model)
    assert NoiseService.monte_carlo_agreement(result, analytic) >= 0.95


def _result(mean, stderr, n=20):
    t = np.arange(len(mean), dtype=float)
    return MonteCarloResult(t=t, mean=np.asarray(mean, dtype=float), stderr=np.asarray(stderr, dtype=float),
                            n_realizations=10, seed=0, cluster=ClusterSpec(n, 1.0))


def test_monte_carlo_agreement_skips_unresolvable_tail_points():
    plateau = DynamicsService.p1_time_average(20)
    analytic = np.array([1.0, 0.6, plateau + 1e-9, plateau - 1e-8])
    # the two tail points miss by many standard errors, as rare realizations dominate there
    result = _result([1.0, 0.6 + 2e-3, plateau + 5e-8, plateau + 1e-7], [0.0, 1e-3, 1e-12, 1e-12])
    assert NoiseService.monte_carlo_agreement(result, analytic) == 1.0
    result = _result([1.0, 0.6 + 4e-3, plateau, plateau], [0.0, 1e-3, 0.0, 0.0])
    assert NoiseService.monte_carlo_agreement(result, analytic) == 0.5


def test_monte_carlo_agreement_without_resolvable_points():
    plateau = DynamicsService.p1_time_average(20)
    result = _result([0.0, 0.0], [1e-3, 1e-3])
    assert NoiseService.monte_carlo_agreement(result, [plateau, plateau]) == 1.0


def test_monte_carlo_seeds_agree_within_error_bars():
    n = 30
    model = NoiseModel(mean_g=1.0, variance=1e-3, t_c=5.0)
    t = np.linspace(0.0, 10.0, 101)
    first = NoiseService.monte_carlo(n, t, model, n_realizations=200, seed=1)
    second = NoiseService.monte_carlo(n, t, model, n_realizations=200, seed=2)
    assert not np.array_equal(first.mean, second.mean)
    analytic = NoiseService.p1_noise_analytic(n, t, model)
    plateau = DynamicsService.p1_time_average(n)
    spread = np.hypot(first.stderr, second.stderr)
    resolvable = (np.abs(analytic - plateau) > 1e-6) & (spread > 0)
    z = np.abs(first.mean - second.mean)[resolvable] / spread[resolvable]
    assert resolvable.sum() > 10
    assert np.mean(z > 4.0) <= 0.05
