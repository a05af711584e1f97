import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from errors import DomainError


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class Kernel(enum.Enum):
    EXPONENTIAL = "exponential"
    CUSTOM = "custom"


class EnvelopeRegime(enum.Enum):
    AUTO = "auto"
    LONG_CORRELATION = "long"
    SHORT_CORRELATION = "short"
    EXACT = "exact"


class ThetaSide(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class SpectrumRoute(enum.Enum):
    ANALYTIC = "analytic"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class CavityGeometry:
    """Ellipsoidal cavity; lengths in nm, alpha in rad"""
    a: float
    b: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"semi-axes must be positive, got a={self.a}, b={self.b}")
        if not (0.0 <= self.alpha <= math.pi):
            raise DomainError(f"alpha must lie in [0, pi], got {self.alpha}")

    @property
    def volume(self):
        return 4.0 * math.pi / 3.0 * self.a * self.b * self.b

    @property
    def aspect(self):
        return self.a / self.b

    @classmethod
    def from_volume(cls, volume, aspect, alpha=0.0):
        # V = (4pi/3) a b^2 with a = aspect * b
        b = (3.0 * volume / (4.0 * math.pi * aspect)) ** (1.0 / 3.0)
        return cls(a=aspect * b, b=b, alpha=alpha)


@dataclass(frozen=True)
class GasSpec:
    gamma: float
    concentration: float
    n_spins: int

    def __post_init__(self):
        if self.gamma <= 0 or self.concentration <= 0:
            raise DomainError("gamma and concentration must be positive")
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise DomainError(f"n_spins must be an integer >= 2, got {self.n_spins}")


@dataclass(frozen=True)
class ClusterSpec:
    n_spins: int
    g: float = 0.0

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise DomainError(f"n_spins must be an integer >= 2, got {self.n_spins}")

    @property
    def parity(self):
        return Parity.EVEN if self.n_spins % 2 == 0 else Parity.ODD

    @property
    def n_fragment(self):
        return self.n_spins - 1

    def to_tau(self, t):
        return 0.5 * self.g * np.asarray(t, dtype=float)

    def to_t(self, tau):
        if self.g == 0:
            raise DomainError("g = 0 freezes the dynamics; only tau-parameterized traces are defined")
        return 2.0 * np.asarray(tau, dtype=float) / self.g


@dataclass
class PolarizationTrace:
    tau: np.ndarray
    p1: np.ndarray
    p_other: np.ndarray
    cluster: ClusterSpec
    t: Optional[np.ndarray] = None

    @property
    def total(self):
        return self.p1 + (self.cluster.n_spins - 1) * self.p_other

    def max_conservation_error(self):
        return float(np.max(np.abs(self.total - 1.0)))


@dataclass(frozen=True)
class NoiseModel:
    mean_g: float
    variance: float
    t_c: float
    kernel: Kernel = Kernel.EXPONENTIAL
    correlation: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.variance < 0:
            raise DomainError(f"variance must be non-negative, got {self.variance}")
        if self.t_c <= 0:
            raise DomainError(f"t_c must be positive, got {self.t_c}")
        if self.kernel is Kernel.CUSTOM:
            if self.correlation is None:
                raise DomainError("a custom kernel needs a correlation function")
            if abs(self.correlation(0.0) - 1.0) > 1e-12:
                raise DomainError("correlation function must satisfy gamma(0) = 1")
            if any(abs(self.correlation(float(x))) > 1.0 + 1e-12 for x in np.linspace(0.0, 10.0 * self.t_c, 65)):
                raise DomainError("correlation function must satisfy |gamma(t)| <= 1")

    def gamma(self, t):
        if self.kernel is Kernel.EXPONENTIAL:
            return np.exp(-np.asarray(t, dtype=float) / self.t_c)
        return self.correlation(t)


@dataclass
class LineShape:
    t_grid: np.ndarray
    fid: np.ndarray
    omega_grid: np.ndarray
    spectrum: np.ndarray
    m2: float
    m4: float
    t2: float = math.inf
    captured_fraction: float = 1.0
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PulseMetrics:
    period_t: float
    full_period_t: float
    width_t: float
    fwhm_t: float
    plateau_value: float

    @property
    def fwhm_to_width(self):
        return self.fwhm_t / self.width_t


@dataclass(frozen=True)
class CouplingTable:
    two_ib: int
    # (two_m_a, two_i, two_m) -> coefficient
    entries: dict

    def get(self, two_m_a, two_i, two_m):
        return self.entries.get((two_m_a, two_i, two_m), 0.0)


@dataclass(frozen=True)
class MultiplicityTable:
    n_fragment: int
    # two_ib -> w(I_B)
    counts: dict

    def dimension(self):
        return sum((two_ib + 1) * w for two_ib, w in self.counts.items())


@dataclass
class SpinOperatorSet:
    n_spins: int
    omega: float
    g: float
    zeta: float
    iz: np.ndarray
    ix: np.ndarray
    iy_skew: np.ndarray
    total_spin_sq: np.ndarray
    hamiltonian: np.ndarray
    # (eigenvalues, eigenvectors) of the Hamiltonian, filled on first use
    decomposition: Optional[tuple] = None

    @property
    def dimension(self):
        return 2 ** self.n_spins


@dataclass
class InvarianceReport:
    n_spins: int
    max_hamiltonian_gap: float
    max_conservation_error: float
    max_equivalence_gap: float
    tolerance: float

    @property
    def passed(self):
        return (self.max_hamiltonian_gap < self.tolerance
                and self.max_conservation_error < self.tolerance
                and self.max_equivalence_gap < self.tolerance)


@dataclass
class MonteCarloResult:
    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    seed: int
    cluster: ClusterSpec

    def as_trace(self):
        n = self.cluster.n_spins
        return PolarizationTrace(
            tau=self.cluster.to_tau(self.t),
            p1=self.mean,
            p_other=(1.0 - self.mean) / (n - 1),
            cluster=self.cluster,
            t=self.t,
        )
