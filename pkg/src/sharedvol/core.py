"""
Series and panel containers plus the sample correlogram.

Correlograms are returned as float arrays indexed from lag 1, so
``acf[k - 1]`` is the lag-``k`` value. Lag 0 is 1 by definition and is never
stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._errors import DegenerateInputError

__all__ = [
    "Panel",
    "as_series",
    "cross_correlation_matrix",
    "is_constant",
    "sample_acf",
    "sample_pacf",
    "significance_limit",
]


def as_series(values, name: str = "series", min_length: int = 2) -> np.ndarray:
    """Validate ``values`` as a finite 1-d float series and return a copy."""
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise ValueError(f"{name} needs at least {min_length} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def is_constant(x: np.ndarray) -> bool:
    """True when ``x`` has no variation beyond floating-point noise."""
    scale = max(1.0, float(np.max(np.abs(x))))
    return float(np.ptp(x)) <= 1e-12 * scale


@dataclass(frozen=True)
class Panel:
    """K aligned series of common length T.

    ``values`` is stored column-wise with shape ``(T, K)``.
    """

    values: np.ndarray
    labels: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("panel values must be a (T, K) matrix")
        T, K = values.shape
        if K < 1:
            raise ValueError("panel needs at least one series")
        if T < 2:
            raise ValueError("panel series need at least 2 time points")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains NaN or infinite values")
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) != K:
            raise ValueError(f"got {len(labels)} labels for {K} series")
        if len(set(labels)) != K:
            raise ValueError("panel labels must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_series(cls, series: Iterable[Sequence[float]], labels: Sequence[str] | None = None) -> "Panel":
        cols = [np.asarray(s, dtype=float) for s in series]
        lengths = {c.shape[0] for c in cols}
        if len(lengths) > 1:
            raise ValueError(f"series lengths differ: {sorted(lengths)}")
        if labels is None:
            labels = [f"y{i + 1}" for i in range(len(cols))]
        return cls(np.column_stack(cols), tuple(labels))

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def __iter__(self):
        return (self.values[:, i] for i in range(self.n_series))

    def __len__(self) -> int:
        return self.n_series


def _check_lag(x: np.ndarray, max_lag: int) -> None:
    if int(max_lag) != max_lag or max_lag < 1:
        raise ValueError(f"max_lag must be a positive integer, got {max_lag}")
    if max_lag >= x.shape[0]:
        raise ValueError(f"max_lag ({max_lag}) must be smaller than the series length ({x.shape[0]})")


def sample_acf(series, max_lag: int) -> np.ndarray:
    """
    Sample autocorrelations at lags 1..max_lag.

    Each lag uses the full-sample mean and the full-sample sum of squares
    as denominator, so values are biased towards zero at long lags.

    Raises
    ------
    ValueError
        If ``max_lag`` is not below the series length.
    DegenerateInputError
        If the series is constant.
    """
    x = as_series(series)
    _check_lag(x, max_lag)
    if is_constant(x):
        raise DegenerateInputError("autocorrelation of a constant series is undefined")
    d = x - x.mean()
    denom = d @ d
    n = d.shape[0]
    return np.array([d[: n - k] @ d[k:] for k in range(1, max_lag + 1)]) / denom


def durbin_levinson(rho: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations ``rho[0] = rho_1, ...``."""
    m = rho.shape[0]
    pacf = np.empty(m)
    phi = np.zeros(m)
    prev = np.zeros(m)
    for k in range(1, m + 1):
        if k == 1:
            phi_kk = rho[0]
        else:
            num = rho[k - 1] - prev[: k - 1] @ rho[k - 2 :: -1][: k - 1]
            den = 1.0 - prev[: k - 1] @ rho[: k - 1]
            phi_kk = num / den
            phi[: k - 1] = prev[: k - 1] - phi_kk * prev[k - 2 :: -1][: k - 1]
        phi[k - 1] = phi_kk
        pacf[k - 1] = phi_kk
        prev[:k] = phi[:k]
    return pacf


def sample_pacf(series, max_lag: int) -> np.ndarray:
    """Sample partial autocorrelations at lags 1..max_lag (Durbin-Levinson)."""
    return durbin_levinson(sample_acf(series, max_lag))


def significance_limit(n_obs: int) -> float:
    """Two-standard-error band for a white-noise correlogram: 2 / sqrt(n)."""
    if n_obs < 2:
        raise ValueError("need at least 2 observations")
    return 2.0 / np.sqrt(n_obs)


def cross_correlation_matrix(panel: Panel | np.ndarray, labels: Sequence[str] | None = None) -> np.ndarray:
    """Lag-0 Pearson correlation between every pair of series in ``panel``."""
    if isinstance(panel, Panel):
        values, labels = panel.values, panel.labels
    else:
        values = np.asarray(panel, dtype=float)
        if labels is None:
            labels = [str(i) for i in range(values.shape[1])]
    if values.shape[1] < 2:
        raise ValueError("cross-correlation needs at least two series")
    for j in range(values.shape[1]):
        if is_constant(values[:, j]):
            raise DegenerateInputError(f"series {labels[j]!r} is constant")
    d = values - values.mean(axis=0)
    d /= np.sqrt(np.einsum("ij,ij->j", d, d))
    corr = d.T @ d
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)
