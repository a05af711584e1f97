import math
from fractions import Fraction

import numpy as np
import pytest

from errors import DomainError, GridError
from models import ClusterSpec, Parity
from services.dynamics_service import DynamicsService, compensated_sum


@pytest.mark.parametrize("n", [2, 3, 4, 9, 20, 61, 135])
def test_initial_polarization_is_one(n):
    assert DynamicsService.p1_exact(ClusterSpec(n), 0.0) == pytest.approx(1.0, abs=1e-12)


def test_two_spins_closed_form():
    tau = np.linspace(0.0, 2 * math.pi, 101)
    expected = 0.5 + 0.5 * np.cos(2 * tau)
    assert np.max(np.abs(DynamicsService.p1_exact(ClusterSpec(2), tau) - expected)) < 1e-14


def test_time_averages():
    assert DynamicsService.p1_time_average(3) == pytest.approx(5.0 / 9.0, abs=1e-15)
    assert DynamicsService.p1_time_average(2) == pytest.approx(0.5, abs=1e-15)
    for n in (5, 7, 99):
        assert DynamicsService.p1_time_average(n) == pytest.approx((n + 2) / (3 * n))


def test_large_cluster_plateau():
    n = 10_000
    plateau = DynamicsService.p1_time_average(n)
    assert plateau == pytest.approx(1.0 / 3.0, abs=1e-4)
    assert (1.0 - plateau) / (n - 1) == pytest.approx(2.0 / (3 * n), abs=1e-6)


def test_other_spins_share_the_lost_polarization():
    cluster = ClusterSpec(2)
    assert DynamicsService.p_other(cluster, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    cluster = ClusterSpec(9)
    tau = np.linspace(0.0, 4.0, 25)
    total = DynamicsService.p1_exact(cluster, tau) + 8 * DynamicsService.p_other(cluster, tau)
    assert np.max(np.abs(total - 1.0)) < 1e-14


def test_coefficients():
    assert DynamicsService.coefficient_a_exact(0, 4) == Fraction(15, 4)
    assert DynamicsService.coefficient_a_exact(2, 4) == Fraction(-6, 4)
    for k in range(0, 31):
        exact = float(DynamicsService.coefficient_a_exact(k, 61))
        assert DynamicsService.coefficient_A(k, 61) == pytest.approx(exact, rel=1e-12)


def test_spectral_weights_sorted_and_summing_to_oscillating_amplitude():
    for n in (6, 7, 200):
        freqs, weights = DynamicsService.spectral_weights(n)
        assert list(np.abs(weights)) == sorted(np.abs(weights), reverse=True)
        assert math.fsum(weights) == pytest.approx(1.0 - DynamicsService.p1_time_average(n), abs=1e-12)
        assert set(freqs) <= set(range(1, n + 1))


@pytest.mark.parametrize("n", [2, 3, 8, 9, 20, 21, 134, 135])
def test_periodicity_and_symmetry(n):
    cluster = ClusterSpec(n)
    x = np.linspace(0.0, 1.5, 40)
    period = DynamicsService.period_tau(n)
    assert np.max(np.abs(DynamicsService.p1_exact(cluster, x + period) - DynamicsService.p1_exact(cluster, x))) < 1e-12
    if cluster.parity is Parity.ODD:
        assert period == pytest.approx(2 * math.pi)
        left = DynamicsService.p1_oscillating(cluster, math.pi / 2 - x)
        right = DynamicsService.p1_oscillating(cluster, math.pi / 2 + x)
        assert np.max(np.abs(left + right)) < 1e-12
    else:
        assert period == pytest.approx(math.pi)
        diff = DynamicsService.p1_exact(cluster, math.pi - x) - DynamicsService.p1_exact(cluster, math.pi + x)
        assert np.max(np.abs(diff)) < 1e-12


def test_trace_conserves_total_polarization():
    trace = DynamicsService.trace(ClusterSpec(9, g=2.0), np.linspace(0.0, 5.0, 300), parameter="t")
    assert trace.max_conservation_error() < 1e-12
    assert np.allclose(trace.tau, trace.t)
    assert np.array_equal(DynamicsService.total_polarization(trace), trace.total)


def test_trace_is_worker_independent():
    cluster = ClusterSpec(51)
    grid = np.linspace(0.0, 2 * math.pi, 1001)
    single = DynamicsService.trace(cluster, grid, workers=1)
    pooled = DynamicsService.trace(cluster, grid, workers=4)
    assert np.array_equal(single.p1, pooled.p1)


def test_trace_grid_validation():
    cluster = ClusterSpec(4, g=1.0)
    with pytest.raises(GridError):
        DynamicsService.trace(cluster, [])
    with pytest.raises(GridError):
        DynamicsService.trace(cluster, [0.0, 1.0, 0.5])
    with pytest.raises(DomainError):
        DynamicsService.trace(ClusterSpec(4), [0.0, 1.0], parameter="t")


def test_cluster_validation():
    with pytest.raises(DomainError):
        ClusterSpec(1)
    with pytest.raises(DomainError):
        ClusterSpec(4).to_t(1.0)


def test_compensated_sum_matches_fsum():
    terms = np.full(100_000, 0.1)
    assert compensated_sum(terms) == pytest.approx(math.fsum(terms), abs=1e-12)
