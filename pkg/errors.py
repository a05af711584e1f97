class NanoSpinError(Exception):
    """Base class for every error raised by the simulator"""


class DomainError(NanoSpinError, ValueError):
    """Argument outside the domain of an operation"""


class GridError(DomainError):
    """Empty, non-monotone or too coarse time/frequency grid"""


class StepSizeError(GridError):
    """Monte Carlo grid step exceeds t_c/10"""


class NoSolutionError(NanoSpinError):
    """Measured pulse observables correspond to no attainable shape"""


class DegenerateGeometryError(NanoSpinError):
    """Cavity shape cannot be identified (magic angle)"""


class QuadratureError(NanoSpinError):
    """Adaptive quadrature did not reach the requested tolerance"""


class ConvergenceError(NanoSpinError):
    """Iterative solver hit its iteration cap"""


class ValidationFailure(NanoSpinError):
    """A cross-validation check exceeded its tolerance"""

    def __init__(self, check, deviation, tolerance):
        self.check = check
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(f"{check}: deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")
