"""
Portmanteau tests for autocorrelation and ARCH effects, and normal Q-Q data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ._errors import DegenerateInputError
from .core import as_series, is_constant, sample_acf

__all__ = [
    "DiagnosticResult",
    "QQData",
    "chi2_sf",
    "li_mak",
    "ljung_box",
    "ljung_box_statistics",
    "mcleod_li",
    "qq_normal",
]


def chi2_sf(x, df):
    """Upper tail of the chi-square distribution, Q(df/2, x/2)."""
    return special.gammaincc(np.asarray(df, dtype=float) / 2.0, np.asarray(x, dtype=float) / 2.0)


@dataclass(frozen=True)
class DiagnosticResult:
    """Outcome of a portmanteau test over a range of lags.

    ``statistics[i]`` and ``p_values[i]`` belong to ``lags[i]``; ``df[i]``
    is the chi-square degrees of freedom used for that lag.
    """

    test_name: str
    lags: tuple
    statistics: np.ndarray
    p_values: np.ndarray
    df: tuple
    reject_null: bool
    significance_level: float
    decision_rule: str = ""

    @property
    def n_significant(self) -> int:
        return int(np.sum(self.p_values < self.significance_level))

    def to_dict(self) -> dict:
        return {
            "test": self.test_name,
            "lags": list(self.lags),
            "statistics": [float(s) for s in self.statistics],
            "p_values": [float(p) for p in self.p_values],
            "df": list(self.df),
            "reject_null": self.reject_null,
            "significance_level": self.significance_level,
            "decision_rule": self.decision_rule,
        }


def ljung_box_statistics(series, max_lag: int) -> np.ndarray:
    """Q(m) = T (T + 2) sum_{k<=m} r_k^2 / (T - k) for m = 1..max_lag."""
    x = as_series(series)
    if is_constant(x):
        raise DegenerateInputError("Ljung-Box statistic of a constant series is undefined")
    n = x.shape[0]
    r = sample_acf(x, max_lag)
    k = np.arange(1, max_lag + 1)
    return n * (n + 2.0) * np.cumsum(r * r / (n - k))


def ljung_box(series, max_lag: int = 20, fitted_df: int = 0, significance_level: float = 0.05) -> DiagnosticResult:
    """
    Ljung-Box test for residual autocorrelation.

    Lags ``fitted_df + 1 .. max_lag`` are reported, each with a chi-square
    reference on ``m - fitted_df`` degrees of freedom. The null of no
    autocorrelation is rejected when the p-value at ``max_lag`` is below
    ``significance_level``.
    """
    if fitted_df < 0 or fitted_df >= max_lag:
        raise ValueError(f"fitted_df must lie in [0, max_lag), got {fitted_df}")
    q = ljung_box_statistics(series, max_lag)
    lags = np.arange(fitted_df + 1, max_lag + 1)
    df = lags - fitted_df
    stat = q[fitted_df:]
    pv = chi2_sf(stat, df)
    return DiagnosticResult(
        "ljung_box",
        tuple(int(v) for v in lags),
        stat,
        pv,
        tuple(int(v) for v in df),
        bool(pv[-1] < significance_level),
        significance_level,
        "p-value at the largest lag below the significance level",
    )


def mcleod_li(
    residuals,
    max_lag: int = 20,
    significance_level: float = 0.05,
    max_fraction: float = 0.05,
) -> DiagnosticResult:
    """
    McLeod-Li test for ARCH effects: Ljung-Box on squared residuals.

    Every lag 1..max_lag is tested. The no-ARCH null is rejected when the
    share of lags with a p-value below ``significance_level`` exceeds
    ``max_fraction``.
    """
    x = as_series(residuals, "residuals")
    lb = ljung_box(x * x, max_lag, 0, significance_level)
    k = int(np.sum(lb.p_values < significance_level))
    return DiagnosticResult(
        "mcleod_li",
        lb.lags,
        lb.statistics,
        lb.p_values,
        lb.df,
        k / len(lb.lags) > max_fraction,
        significance_level,
        f"share of significant lags above {max_fraction}",
    )


def li_mak(
    standardized_residuals,
    max_lag: int = 20,
    p: int = 1,
    q: int = 1,
    significance_level: float = 0.05,
) -> DiagnosticResult:
    """
    Portmanteau test on squared standardized residuals of a GARCH(p, q) fit.

    Degrees of freedom are reduced by ``p + q``. The null (no ARCH left in
    the standardized residuals) is rejected when the p-value at
    ``max_lag`` is below ``significance_level``.
    """
    if max_lag <= p + q:
        raise ValueError(f"max_lag must exceed p + q = {p + q}")
    z = as_series(standardized_residuals, "standardized_residuals")
    lb = ljung_box(z * z, max_lag, p + q, significance_level)
    return DiagnosticResult(
        "li_mak",
        lb.lags,
        lb.statistics,
        lb.p_values,
        lb.df,
        lb.reject_null,
        significance_level,
        lb.decision_rule,
    )


@dataclass(frozen=True)
class QQData:
    theoretical_quantiles: np.ndarray
    sample_quantiles: np.ndarray
    envelope_lower: np.ndarray
    envelope_upper: np.ndarray

    @property
    def inside(self) -> np.ndarray:
        return (self.sample_quantiles >= self.envelope_lower) & (self.sample_quantiles <= self.envelope_upper)

    @property
    def coverage(self) -> float:
        """Share of points inside the pointwise envelope."""
        return float(self.inside.mean())

    def to_dict(self) -> dict:
        return {
            "theoretical": self.theoretical_quantiles.tolist(),
            "sample": self.sample_quantiles.tolist(),
            "lower": self.envelope_lower.tolist(),
            "upper": self.envelope_upper.tolist(),
        }


def qq_normal(series, level: float = 0.95) -> QQData:
    """
    Normal Q-Q coordinates with a pointwise confidence envelope.

    The input is centred and rescaled to the standard deviation of the
    theoretical quantile grid at plotting positions (i - 0.5) / T, so an
    exactly normal grid maps onto the identity line. The envelope uses the
    large-sample standard error of the p-th order statistic,
    sqrt(p (1 - p) / T) / phi(z_p).
    """
    x = as_series(series, min_length=10)
    if is_constant(x):
        raise DegenerateInputError("Q-Q plot of a constant series is undefined")
    n = x.shape[0]
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = stats.norm.ppf(probs)
    d = x - x.mean()
    sample = np.sort(d) * (theo.std() / d.std())
    half = stats.norm.ppf(0.5 + level / 2.0) * np.sqrt(probs * (1.0 - probs) / n) / stats.norm.pdf(theo)
    return QQData(theo, sample, theo - half, theo + half)
