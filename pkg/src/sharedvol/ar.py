"""
Autoregressive models: simulation, order identification and OLS fitting.

    Y_t = mu + phi_1 Y_{t-1} + ... + phi_u Y_{t-u} + eta_t
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter, lfiltic

from ._errors import DegenerateInputError, FitFailureError
from .core import as_series, is_constant, sample_acf, sample_pacf, significance_limit

__all__ = [
    "ARFit",
    "ARSpec",
    "BURN_IN",
    "ar_signature",
    "fit_ar",
    "fit_identified",
    "fit_mean_only",
    "identify_ar_order",
    "is_stationary",
    "simulate_ar",
]

BURN_IN = 200
MAX_ORDER_CAP = 5


def is_stationary(coefficients) -> bool:
    """True when every root of 1 - phi_1 z - ... - phi_u z^u lies outside the unit circle."""
    phi = np.asarray(coefficients, dtype=float)
    if phi.size == 0:
        return True
    # roots of z^u - phi_1 z^{u-1} - ... - phi_u must sit strictly inside the unit circle
    roots = np.roots(np.r_[1.0, -phi])
    return bool(np.all(np.abs(roots) < 1.0))


@dataclass(frozen=True)
class ARSpec:
    coefficients: tuple = ()
    intercept: float = 0.0

    def __post_init__(self):
        coefs = tuple(float(c) for c in np.atleast_1d(np.asarray(self.coefficients, dtype=float)))
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def stationary(self) -> bool:
        return is_stationary(self.coefficients)


@dataclass(frozen=True)
class ARFit:
    """Result of an AR(u) least-squares fit.

    ``residuals`` has length ``T - order``: residual ``j`` belongs to time
    index ``order + j`` of the input series.
    """

    spec: ARSpec
    standard_errors: np.ndarray
    residuals: np.ndarray
    fitted_values: np.ndarray
    intercept_se: float = np.nan
    sigma2: float = np.nan
    warnings: tuple = field(default=())

    @property
    def order(self) -> int:
        return self.spec.order

    @property
    def coefficients(self) -> np.ndarray:
        return np.asarray(self.spec.coefficients)

    @property
    def first_coefficient(self) -> float:
        """Lag-1 coefficient, 0.0 for a mean-only fit."""
        return self.spec.coefficients[0] if self.order else 0.0

    def with_warnings(self, *notes: str) -> "ARFit":
        return replace(self, warnings=self.warnings + tuple(notes))


def simulate_ar(spec: ARSpec, innovations) -> np.ndarray:
    """
    Run the AR recursion over ``innovations``.

    Pre-sample values are set to the intercept, so the output starts
    from a transient; discard a burn-in prefix when stationarity matters.
    """
    if not spec.stationary:
        raise ValueError(f"AR coefficients {spec.coefficients} are not stationary")
    e = as_series(innovations, "innovations", min_length=1)
    if spec.order == 0:
        return spec.intercept + e
    a = np.r_[1.0, -np.asarray(spec.coefficients)]
    zi = lfiltic([1.0], a, np.full(spec.order, spec.intercept))
    y, _ = lfilter([1.0], a, spec.intercept + e, zi=zi)
    return y


def _leading_run(values: np.ndarray, limit: float) -> int:
    significant = np.abs(values) > limit
    if significant.all():
        return significant.shape[0]
    return int(np.argmin(significant))


def identify_ar_order(series, max_lag: int = 20, cap: int = MAX_ORDER_CAP) -> int:
    """
    AR order from the PACF cutoff.

    The order is the length of the leading run of PACF values outside
    +-2/sqrt(T): the first non-significant lag ends the run. The result is
    truncated at ``cap``.
    """
    x = as_series(series)
    max_lag = min(int(max_lag), x.shape[0] - 1)
    pacf = sample_pacf(x, max_lag)
    return min(_leading_run(pacf, significance_limit(x.shape[0])), int(cap))


def ar_signature(series, max_lag: int = 20) -> str:
    """
    Classify the correlogram shape as ``white``, ``ar``, ``ma`` or ``arma``.

    Only used to flag series whose correlogram suggests a moving-average
    component; the models fitted are always pure AR.
    """
    x = as_series(series)
    max_lag = min(int(max_lag), x.shape[0] - 1)
    limit = significance_limit(x.shape[0])
    acf = sample_acf(x, max_lag)
    pacf = sample_pacf(x, max_lag)
    acf_run = _leading_run(acf, limit)
    pacf_run = _leading_run(pacf, limit)
    if acf_run == 0 and pacf_run == 0:
        return "white"
    if acf_run >= MAX_ORDER_CAP and pacf_run >= MAX_ORDER_CAP:
        return "arma"
    # a cutoff in the ACF with a longer-lived PACF is the MA pattern
    return "ma" if pacf_run > acf_run else "ar"


def _lag_design(x: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    X = np.empty((n - order, order + 1))
    X[:, 0] = 1.0
    for i in range(1, order + 1):
        X[:, i] = x[order - i : n - i]
    return X, x[order:]


def fit_mean_only(series) -> ARFit:
    """AR(0) fit: the intercept is the sample mean, residuals are demeaned data."""
    x = as_series(series)
    mu = x.mean()
    resid = x - mu
    n = x.shape[0]
    s2 = resid @ resid / (n - 1)
    return ARFit(ARSpec((), mu), np.empty(0), resid, np.full(n, mu), np.sqrt(s2 / n), s2)


def fit_ar(series, order: int) -> ARFit:
    """
    Conditional least-squares AR(order) fit with intercept.

    Standard errors come from the OLS covariance s^2 (X'X)^{-1} with
    s^2 = RSS / (n - order - 1), where n = T - order.
    """
    x = as_series(series)
    T = x.shape[0]
    order = int(order)
    if order < 1:
        raise ValueError("order must be positive; use fit_mean_only for AR(0)")
    if order >= T / 4:
        raise ValueError(f"order {order} too large for {T} observations")
    if is_constant(x):
        raise FitFailureError("cannot fit an AR model to a constant series")
    X, y = _lag_design(x, order)
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise FitFailureError(f"singular lag design for AR({order})")
    fitted = X @ beta
    resid = y - fitted
    n, k = X.shape
    dof = n - k
    s2 = resid @ resid / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return ARFit(ARSpec(tuple(beta[1:]), beta[0]), se[1:], resid, fitted, se[0], s2)


def fit_identified(series, max_lag: int = 20, cap: int = MAX_ORDER_CAP) -> ARFit:
    """Identify the order from the PACF, then fit (mean-only for order 0)."""
    x = as_series(series)
    if is_constant(x):
        raise DegenerateInputError("constant series")
    order = identify_ar_order(x, max_lag, cap)
    notes = []
    signature = ar_signature(x, max_lag)
    if signature in ("ma", "arma"):
        notes.append(f"correlogram suggests a {signature.upper()} component; fitted pure AR({order})")
    fit = fit_ar(x, order) if order else fit_mean_only(x)
    return fit.with_warnings(*notes)
