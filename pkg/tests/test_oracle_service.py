import math

import numpy as np
import pytest

from errors import DomainError
from models import ClusterSpec
from services.dynamics_service import DynamicsService
from services.oracle_service import OracleService
from services.spectral_cg_service import SpectralCGService


def test_spectrum_multiplicities_small_clusters():
    assert OracleService.spectrum_multiplicities(OracleService.build_operators(2)) == {0: 1, 2: 3}
    assert OracleService.spectrum_multiplicities(OracleService.build_operators(3)) == {1: 4, 3: 4}


@pytest.mark.parametrize("n", range(2, 9))
def test_spectrum_multiplicities_match_counting(n):
    counts = OracleService.spectrum_multiplicities(OracleService.build_operators(n))
    expected = {two_i: (two_i + 1) * SpectralCGService.multiplicity_w(two_i, n) for two_i in range(n % 2, n + 1, 2)}
    assert counts == expected


def test_operator_algebra():
    ops = OracleService.build_operators(5, omega=1.3, g=0.7, zeta=-0.4)
    spin_sq = ops.total_spin_sq
    assert np.array_equal(ops.hamiltonian, ops.hamiltonian.T)
    rebuilt = ops.ix @ ops.ix - ops.iy_skew @ ops.iy_skew + np.diag(ops.iz.sum(axis=0) ** 2)
    assert np.max(np.abs(rebuilt - spin_sq)) < 1e-12
    iz = np.diag(ops.iz.sum(axis=0))
    assert np.max(np.abs(spin_sq @ iz - iz @ spin_sq)) < 1e-12


def test_hamiltonian_commutes_with_total_spin():
    rng = np.random.default_rng(7)
    for _ in range(3):
        ops = OracleService.build_operators(6, omega=rng.uniform(-10, 10), g=1.0, zeta=rng.uniform(-3, 3))
        commutator = ops.hamiltonian @ ops.total_spin_sq - ops.total_spin_sq @ ops.hamiltonian
        assert np.max(np.abs(commutator)) < 1e-10


def test_trace_initial_values():
    ops = OracleService.build_operators(4, omega=2.0, g=1.0, zeta=1.0)
    assert OracleService.polarization_trace_exact(ops, 1, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert OracleService.polarization_trace_exact(ops, 2, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_two_spins_swap_completely():
    ops = OracleService.build_operators(2, g=1.0)
    # g t / 2 = pi / 2
    assert OracleService.polarization_trace_exact(ops, 1, math.pi) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_oracle_matches_closed_form(n):
    ops = OracleService.build_operators(n, omega=3.0, g=1.0, zeta=0.5)
    tau = np.linspace(0.0, 2 * math.pi, 200)
    oracle = OracleService.polarization_trace_exact(ops, 1, 2.0 * tau)
    assert np.max(np.abs(oracle - DynamicsService.p1_exact(ClusterSpec(n), tau))) < 1e-10


@pytest.mark.slow
@pytest.mark.parametrize("n", [9, 10])
def test_oracle_matches_closed_form_larger_clusters(n):
    ops = OracleService.build_effective(n)
    tau = np.linspace(0.0, 2 * math.pi, 200)
    oracle = OracleService.polarization_trace_exact(ops, 1, 2.0 * tau)
    assert np.max(np.abs(oracle - DynamicsService.p1_exact(ClusterSpec(n), tau))) < 1e-10


def test_invariance_under_field_and_anisotropy():
    t = np.linspace(0.0, 12.0, 40)
    report = OracleService.invariance_check(4, t, [(10.0, 2.0), (10.0, 0.0)])
    assert report.passed
    assert report.max_hamiltonian_gap < 1e-10


def test_conservation_at_random_times():
    t = np.random.default_rng(3).uniform(0.0, 50.0, 100)
    report = OracleService.invariance_check(3, t, [(0.5, 1.0)])
    assert report.max_conservation_error < 1e-10


def test_other_spins_are_equivalent():
    ops = OracleService.build_operators(5, omega=4.0, g=1.0, zeta=2.0)
    t = np.linspace(0.0, 10.0, 60)
    p2 = OracleService.polarization_trace_exact(ops, 2, t)
    p4 = OracleService.polarization_trace_exact(ops, 4, t)
    assert np.max(np.abs(p2 - p4)) < 1e-12


def test_size_guards():
    with pytest.raises(DomainError):
        OracleService.build_operators(13)
    with pytest.raises(DomainError):
        OracleService.invariance_check(11, [0.0], [])
    with pytest.raises(DomainError):
        OracleService.polarization_trace_exact(OracleService.build_operators(3), 4, 0.0)
