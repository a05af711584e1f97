import logging
from collections import Counter

import numpy as np
from scipy import linalg

from errors import ConvergenceError, DomainError
from models import InvarianceReport, SpinOperatorSet

logger = logging.getLogger(__name__)

MAX_N = 12
GAP_RESOLUTION = 1e-9


def _spin_tables(n_spins):
    states = np.arange(2 ** n_spins)
    bits = (states[None, :] >> np.arange(n_spins)[:, None]) & 1
    # bit set = spin up (+1/2)
    return states, bits, bits - 0.5


class OracleService:
    """Brute-force 2^N product-basis simulator; ground truth for small clusters"""

    @staticmethod
    def build_operators(n_spins, omega=0.0, g=1.0, zeta=0.0):
        if int(n_spins) != n_spins or not 2 <= n_spins <= MAX_N:
            raise DomainError(f"oracle supports 2 <= N <= {MAX_N}, got {n_spins}")
        n = int(n_spins)
        dim = 2 ** n
        states, bits, iz = _spin_tables(n)

        zz = np.zeros(dim)
        flip_flop = np.zeros((dim, dim))  # sum_{i<j} (I_ix I_jx + I_iy I_jy), real in this basis
        for i in range(n):
            for j in range(i + 1, n):
                zz += iz[i] * iz[j]
                mask = bits[i] != bits[j]
                rows = states[mask]
                flip_flop[rows, rows ^ ((1 << i) | (1 << j))] += 0.5

        ix = np.zeros((dim, dim))
        iy_skew = np.zeros((dim, dim))  # I_y = -i * iy_skew
        for i in range(n):
            down = states[bits[i] == 0]
            up = down | (1 << i)
            ix[up, down] += 0.5
            ix[down, up] += 0.5
            iy_skew[up, down] += 0.5
            iy_skew[down, up] -= 0.5

        total_iz = iz.sum(axis=0)
        total_spin_sq = 2.0 * flip_flop
        total_spin_sq[np.diag_indices(dim)] += 0.75 * n + 2.0 * zz

        # (g/2) sum_{m != n} {zeta zz - xx - yy} = g sum_{m < n} {zeta zz - flip-flop}
        hamiltonian = -g * flip_flop
        hamiltonian[np.diag_indices(dim)] += omega * total_iz + g * zeta * zz

        logger.debug(f"Built oracle operators N={n} dim={dim} omega={omega} g={g} zeta={zeta}")
        return SpinOperatorSet(n_spins=n, omega=omega, g=g, zeta=zeta, iz=iz, ix=ix, iy_skew=iy_skew,
                               total_spin_sq=total_spin_sq, hamiltonian=hamiltonian)

    @staticmethod
    def build_effective(n_spins, g=1.0):
        """Operators whose Hamiltonian is H' = -(g/2) I^2"""
        ops = OracleService.build_operators(n_spins, omega=0.0, g=g, zeta=0.0)
        ops.hamiltonian = -0.5 * g * ops.total_spin_sq
        ops.decomposition = None
        return ops

    @staticmethod
    def diagonalize(ops: SpinOperatorSet):
        if ops.decomposition is None:
            try:
                evals, evecs = linalg.eigh(ops.hamiltonian)
            except linalg.LinAlgError as e:
                raise ConvergenceError(f"eigensolver failed for N={ops.n_spins}: {e}") from e
            logger.info(f"Diagonalized oracle Hamiltonian N={ops.n_spins} (dim {ops.dimension})")
            ops.decomposition = (evals, evecs)
        return ops.decomposition

    @staticmethod
    def polarization_trace_exact(ops: SpinOperatorSet, n, t):
        """P_n(t) = tr{e^{iHt} I_1z e^{-iHt} I_nz} / tr{I_1z^2}, n counted from 1"""
        if not 1 <= n <= ops.n_spins:
            raise DomainError(f"spin index must lie in [1, {ops.n_spins}], got {n}")
        evals, evecs = OracleService.diagonalize(ops)
        a = (evecs.T * ops.iz[0]) @ evecs
        b = (evecs.T * ops.iz[n - 1]) @ evecs
        weights = (a * b).ravel()
        gaps = (evals[:, None] - evals[None, :]).ravel()

        # the spectrum is highly degenerate: merge equal gaps before evaluating phases
        resolution = GAP_RESOLUTION * max(1.0, float(np.max(np.abs(evals))))
        _, inverse = np.unique(np.rint(gaps / resolution).astype(np.int64), return_inverse=True)
        amplitudes = np.bincount(inverse, weights=weights)
        frequencies = np.bincount(inverse, weights=gaps) / np.bincount(inverse)

        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        values = np.cos(np.outer(t_arr, frequencies)) @ amplitudes / (ops.dimension / 4.0)
        return float(values[0]) if np.ndim(t) == 0 else values

    @staticmethod
    def spectrum_multiplicities(ops: SpinOperatorSet):
        """{2I: number of eigenvalues of I^2 equal to I(I+1)}"""
        evals = linalg.eigvalsh(ops.total_spin_sq)
        two_i = np.rint(np.sqrt(1.0 + 4.0 * np.clip(evals, 0.0, None)) - 1.0).astype(int)
        return dict(sorted(Counter(two_i.tolist()).items()))

    @staticmethod
    def invariance_check(n_spins, t_samples, parameter_sets, g=1.0, tolerance=1e-10):
        """Compare the full Hamiltonian with H' = -(g/2) I^2 for every (omega, zeta) pair"""
        if n_spins > 10:
            raise DomainError(f"invariance check supports N <= 10, got {n_spins}")
        reference = OracleService.build_effective(n_spins, g)
        ref = np.array([OracleService.polarization_trace_exact(reference, n, t_samples)
                        for n in range(1, n_spins + 1)])

        hamiltonian_gap = 0.0
        conservation = float(np.max(np.abs(ref.sum(axis=0) - 1.0)))
        equivalence = float(np.max(np.abs(ref[1:] - ref[1]))) if n_spins > 2 else 0.0
        for omega, zeta in parameter_sets:
            ops = OracleService.build_operators(n_spins, omega=omega, g=g, zeta=zeta)
            full = np.array([OracleService.polarization_trace_exact(ops, n, t_samples)
                             for n in range(1, n_spins + 1)])
            hamiltonian_gap = max(hamiltonian_gap, float(np.max(np.abs(full - ref))))
            conservation = max(conservation, float(np.max(np.abs(full.sum(axis=0) - 1.0))))
            if n_spins > 2:
                equivalence = max(equivalence, float(np.max(np.abs(full[1:] - full[1]))))

        report = InvarianceReport(n_spins=n_spins, max_hamiltonian_gap=hamiltonian_gap,
                                  max_conservation_error=conservation, max_equivalence_gap=equivalence,
                                  tolerance=tolerance)
        if not report.passed:
            logger.warning(f"Invariance check failed for N={n_spins}: {report}")
        return report
