"""
Exception hierarchy
Every numerical rejection carries the diagnostic that caused it
"""

from typing import Optional


class KdVLabError(Exception):
    """Base class for all laboratory errors"""


class GridError(KdVLabError, ValueError):
    """Invalid grid request (non power-of-two size, non-positive length)"""


class ParameterError(KdVLabError, ValueError):
    """Parameters outside the admissible region"""


class NonFiniteFieldError(KdVLabError, ValueError):
    """A field acquired NaN or Inf samples"""


class SingularSystemError(KdVLabError):
    """A small linear system is singular or badly conditioned"""

    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class EigensolverError(KdVLabError):
    """Dense eigensolve failed"""


class InstabilityError(KdVLabError):
    """Time stepping produced non-finite values"""

    def __init__(self, message: str, t: Optional[float] = None):
        suffix = f" at t={t:.6g}" if t is not None else ""
        super().__init__(f"{message}{suffix}")
        self.t = t


class ConstraintDriftError(KdVLabError):
    """The weighted perturbation left the continuous spectral subspace"""

    def __init__(self, drift: float, tolerance: float):
        super().__init__(f"Modulation constraint drift {drift:.3e} exceeds {tolerance:.1e}")
        self.drift = drift
        self.tolerance = tolerance


class ModulationConditionError(SingularSystemError):
    """Modulation matrix too ill-conditioned: the state left the tube of validity"""


class NewtonConvergenceError(KdVLabError):
    """Damped Newton iteration did not converge"""

    def __init__(self, residual: float, iterations: int):
        super().__init__(f"Newton did not converge in {iterations} iterations (residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


class FitError(KdVLabError, ValueError):
    """A decay fit was requested on unusable data"""


class ZeroNormError(KdVLabError, ZeroDivisionError):
    """A ratio was requested with a vanishing denominator"""


class ConfigError(KdVLabError, ValueError):
    """Scenario configuration file could not be used"""
