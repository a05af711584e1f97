import math

import numpy as np
import pytest

from errors import DomainError
from models import ClusterSpec, ThetaSide
from services.asymptotics_service import AsymptoticsService
from services.dynamics_service import DynamicsService


def test_theta_identity_at_unit_width():
    left = AsymptoticsService.poisson_theta(0.0, 1.0, ThetaSide.LEFT)
    right = AsymptoticsService.poisson_theta(0.0, 1.0, ThetaSide.RIGHT)
    assert abs(left - right) < 1e-14


def test_theta_limits():
    assert AsymptoticsService.poisson_theta(0.0, 100.0, ThetaSide.LEFT) == pytest.approx(1.0, abs=1e-12)
    assert AsymptoticsService.poisson_theta(0.0, 100.0, ThetaSide.RIGHT) == pytest.approx(1.0, abs=1e-12)
    a = 1e-4
    assert AsymptoticsService.poisson_theta(0.0, a, ThetaSide.LEFT) == pytest.approx(math.sqrt(math.pi / a), rel=1e-6)


def test_theta_identity_over_grid():
    for eps in np.linspace(0.0, 1.0, 11):
        for a in np.logspace(-3, 3, 13):
            left = AsymptoticsService.poisson_theta(eps, a, ThetaSide.LEFT)
            right = AsymptoticsService.poisson_theta(eps, a, ThetaSide.RIGHT)
            assert abs(left - right) < 1e-12 * max(1.0, abs(left))


def test_theta_rejects_non_positive_width():
    with pytest.raises(DomainError):
        AsymptoticsService.poisson_theta(0.0, 0.0)


@pytest.mark.parametrize("n", [100, 101])
@pytest.mark.parametrize("tau", [0.0, 0.1, math.pi / 2])
def test_partial_sums_direct_vs_resummed(n, tau):
    odd = n % 2 == 1
    direct = AsymptoticsService.theta_partial_sums(2 * tau, 2.0 / n, half_integer=odd, method="direct")
    resummed = AsymptoticsService.theta_partial_sums(2 * tau, 2.0 / n, half_integer=odd)
    assert resummed[0] == pytest.approx(direct[0], abs=1e-12)
    assert resummed[1] == pytest.approx(direct[1], rel=1e-12, abs=1e-12)


def test_s1_at_the_peak():
    n = 100
    assert AsymptoticsService.s1(0.0, n) == pytest.approx(-0.5 + 0.5 * math.sqrt(math.pi * n / 2), abs=1e-12)


def test_s2_is_minus_derivative_of_s1():
    omega, a = 0.3, 0.02
    delta = 1e-6 * a
    s1_plus, _ = AsymptoticsService.theta_partial_sums(omega, a + delta)
    s1_minus, _ = AsymptoticsService.theta_partial_sums(omega, a - delta)
    _, s2 = AsymptoticsService.theta_partial_sums(omega, a)
    assert -(s1_plus - s1_minus) / (2 * delta) == pytest.approx(s2, rel=1e-6)


def test_profile_landmarks():
    n = 400
    assert AsymptoticsService.p1_profile_asymptotic(0.0, n) == pytest.approx(1.0, abs=1e-12)
    assert AsymptoticsService.p1_profile_asymptotic(1.0 / math.sqrt(n), n) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_odd_profile_flips_at_half_period():
    assert AsymptoticsService.p1_profile_asymptotic(math.pi, 401) == pytest.approx(-1.0 / 3.0, abs=1e-12)
    assert AsymptoticsService.p1_profile_asymptotic(math.pi, 400) == pytest.approx(1.0, abs=1e-12)
    assert DynamicsService.p1_exact(ClusterSpec(401), math.pi) < 0


def _plateau_gap(n):
    tau = np.linspace(0.3, math.pi - 0.3, 400)
    return np.max(np.abs(AsymptoticsService.p1_profile_asymptotic(tau, n) - DynamicsService.p1_exact(ClusterSpec(n), tau)))


def test_profile_converges_to_exact():
    gaps = [_plateau_gap(n) for n in (100, 400, 1600)]
    assert gaps[1] < 5e-3
    assert gaps[0] > gaps[1] > gaps[2]


def test_pulse_width_scaling():
    scaled = [AsymptoticsService.pulse_metrics(n, 1.0).fwhm_t * math.sqrt(n) for n in (100, 400, 1600, 6400)]
    assert max(scaled) / min(scaled) - 1.0 < 0.02


def test_pulse_metrics_conventions():
    odd = AsymptoticsService.pulse_metrics(101, 2.0)
    assert odd.width_t * math.sqrt(101) * 2.0 / (4 * math.pi) == pytest.approx(1.0)
    assert odd.full_period_t == pytest.approx(2 * odd.period_t)
    even = AsymptoticsService.pulse_metrics(100, 2.0)
    assert even.full_period_t == pytest.approx(even.period_t)
    assert even.fwhm_to_width == pytest.approx(AsymptoticsService.pulse_metrics(400, 2.0).fwhm_to_width, rel=0.02)


def test_plateau_of_large_cluster():
    assert AsymptoticsService.pulse_metrics(10_000, 1.0).plateau_value == pytest.approx(1.0 / 3.0, abs=1e-4)


def test_asymptotic_preconditions():
    with pytest.raises(DomainError):
        AsymptoticsService.pulse_metrics(10, 1.0)
    with pytest.raises(DomainError):
        AsymptoticsService.pulse_metrics(100, 0.0)
    with pytest.raises(DomainError):
        AsymptoticsService.p1_profile_asymptotic(0.0, 20)
