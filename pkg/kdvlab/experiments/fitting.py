"""
Decay Rate Fitting
Least-squares line through (t, log value) after an initial transient
"""

import numpy as np
from pydantic import BaseModel
from scipy import stats

from kdvlab.core.errors import FitError

MIN_SAMPLES = 5
TRANSIENT_FRACTION = 0.1


class DecayFit(BaseModel):
    """Fitted log-linear trend: value ~ exp(intercept + rate t)"""

    rate: float
    kappa_per_delta: float
    r2: float
    intercept: float
    n_used: int

    @property
    def decay_rate(self) -> float:
        """b_fit = -rate, positive for decaying series"""
        return -self.rate


def fit_decay_rate(
    times,
    values,
    delta: float = 1.0,
    transient_fraction: float = TRANSIENT_FRACTION,
) -> DecayFit:
    """
    Fit value(t) ~ C e^{rate t}

    Args:
        times: sample times
        values: positive samples
        delta: segment length for kappa_per_delta = exp(rate delta)
        transient_fraction: leading share of samples dropped before the fit

    Raises:
        FitError: fewer than 5 samples, mismatched lengths or non-positive values
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise FitError(f"times and values must be matching 1-d series, got {t.shape} and {y.shape}")
    if t.size < MIN_SAMPLES:
        raise FitError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
        raise FitError("decay fit needs finite positive values")

    skip = int(np.floor(transient_fraction * t.size))
    t, log_y = t[skip:], np.log(y[skip:])
    line = stats.linregress(t, log_y)

    residual = log_y - (line.intercept + line.slope * t)
    spread = np.sum((log_y - log_y.mean()) ** 2)
    # a constant series is fitted exactly
    r2 = 1.0 if np.ptp(log_y) == 0.0 else float(1.0 - np.sum(residual**2) / spread)

    return DecayFit(
        rate=float(line.slope),
        kappa_per_delta=float(np.exp(line.slope * delta)),
        r2=r2,
        intercept=float(line.intercept),
        n_used=int(t.size),
    )
