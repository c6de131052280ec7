"""
Shared-volatility estimation for a panel of AR series.

Every series is modelled as its own AR(u_i) process, while all series are
driven by one common GARCH innovation. The estimator runs in two passes:

1. fit AR(u_i) to each series and collect the residuals;
2. weight the residuals by the inverse lag-1 coefficient and average them
   into one shared residual series;
3. test it for ARCH effects and fit the best GARCH(p, q) by AIC;
4. subtract the shared residual from every series and refit AR;
5. average the two AR estimates of each series.

Legacy estimates (a joint AR + GARCH fit per series, without any pooling)
are computed alongside for comparison.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ._errors import DegenerateInputError, FitFailureError, PipelineError
from .ar import ARFit, fit_ar, fit_identified, fit_mean_only
from .core import Panel, cross_correlation_matrix, is_constant
from .diagnostics import DiagnosticResult, QQData, li_mak, mcleod_li, qq_normal
from .garch import (
    DEFAULT_CANDIDATES,
    GARCHFit,
    GARCHOrderSelection,
    _numerical_hessian,
    _recursion,
    _to_natural,
    _to_theta,
    identify_garch_order,
)

__all__ = [
    "LegacyFit",
    "PipelineConfig",
    "PipelineReport",
    "align_residuals",
    "average_residuals",
    "combine_passes",
    "compute_weights",
    "first_pass",
    "fit_ar_garch",
    "run_pipeline",
]

logger = logging.getLogger(__name__)

WEIGHTED = "weighted"
UNWEIGHTED = "unweighted"


@dataclass(frozen=True)
class PipelineConfig:
    weighting: str = WEIGHTED
    significance_level: float = 0.05
    max_lag: int = 20
    ar_order_cap: int = 5
    garch_candidates: tuple = DEFAULT_CANDIDATES
    seed: int = 0
    weight_floor: float = 0.01
    mcleod_li_lags: int = 20
    li_mak_lags: int = 20
    n_starts: int = 5
    legacy: bool = True
    always_fit_garch: bool = False

    def __post_init__(self):
        if self.weighting not in (WEIGHTED, UNWEIGHTED):
            raise ValueError(f"weighting must be {WEIGHTED!r} or {UNWEIGHTED!r}, got {self.weighting!r}")
        if not 0.0 < self.significance_level < 1.0:
            raise ValueError("significance_level must lie in (0, 1)")
        object.__setattr__(self, "garch_candidates", tuple(tuple(int(v) for v in c) for c in self.garch_candidates))

    def to_dict(self) -> dict:
        return {
            "weighting": self.weighting,
            "significance_level": self.significance_level,
            "max_lag": self.max_lag,
            "ar_order_cap": self.ar_order_cap,
            "garch_candidates": [list(c) for c in self.garch_candidates],
            "seed": self.seed,
            "weight_floor": self.weight_floor,
            "mcleod_li_lags": self.mcleod_li_lags,
            "li_mak_lags": self.li_mak_lags,
            "n_starts": self.n_starts,
            "legacy": self.legacy,
            "always_fit_garch": self.always_fit_garch,
        }


@dataclass(frozen=True)
class LegacyFit:
    """Joint AR(u) + GARCH(p, q) fit of a single series."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    intercept: float
    garch_params: np.ndarray
    log_likelihood: float


@dataclass
class PipelineReport:
    labels: tuple
    config: PipelineConfig
    first_pass: list
    weights: np.ndarray
    aligned_start: int
    averaged_residuals: np.ndarray
    mcleod_li: DiagnosticResult
    garch_selection: GARCHOrderSelection | None
    second_pass: list
    final_coefficients: list
    final_standard_errors: list
    order_disagreement: list
    diagnostics: list
    cross_correlation_summary: dict | None
    legacy: list | None
    warnings: list = field(default_factory=list)
    qq: QQData | None = None

    @property
    def garch_applicable(self) -> bool:
        return self.garch_selection is not None

    @property
    def shared_garch(self) -> GARCHFit | None:
        return None if self.garch_selection is None else self.garch_selection.best

    @property
    def first_pass_coefficients(self) -> list:
        return [f.coefficients for f in self.first_pass]

    @property
    def second_pass_coefficients(self) -> list:
        return [f.coefficients for f in self.second_pass]

    def lag1(self, which: str = "final") -> np.ndarray:
        """Lag-1 estimate per series (0 where the fit has no AR term)."""
        if which == "final":
            coefs = self.final_coefficients
        elif which == "first":
            coefs = self.first_pass_coefficients
        elif which == "second":
            coefs = self.second_pass_coefficients
        elif which == "legacy":
            coefs = [np.empty(0) if lf is None else lf.coefficients for lf in (self.legacy or [])]
        else:
            raise ValueError(f"unknown estimate {which!r}")
        return np.array([c[0] if len(c) else 0.0 for c in coefs])


def first_pass(panel: Panel, max_lag: int = 20, cap: int = 5) -> list[ARFit]:
    """Identify and fit an AR model for every series in ``panel``."""
    fits = []
    for label, y in zip(panel.labels, panel):
        try:
            fits.append(fit_identified(y, max_lag, cap))
        except (DegenerateInputError, FitFailureError, ValueError) as exc:
            raise PipelineError(f"first-pass AR fit failed for series {label!r}: {exc}", label) from exc
    return fits


def compute_weights(first_coefficients, floor: float = 0.01) -> np.ndarray:
    """
    Normalised inverse-coefficient weights.

    w_i = 1 / max(|phi_i|, floor) and W_i = w_i / sum(w). The absolute value
    and the floor keep every weight positive and bounded.
    """
    phi = np.atleast_1d(np.asarray(first_coefficients, dtype=float))
    if phi.size < 1:
        raise ValueError("need at least one coefficient")
    w = 1.0 / np.maximum(np.abs(phi), floor)
    return w / w.sum()


def align_residuals(fits: Sequence[ARFit], n_obs: int) -> tuple[np.ndarray, int]:
    """
    Stack residual series on their common trailing time span.

    Returns ``(matrix, start)`` where ``matrix`` has shape ``(n_obs - start, K)``
    and row ``j`` belongs to time index ``start + j``.
    """
    start = max(f.order for f in fits)
    length = n_obs - start
    if length <= 0:
        raise PipelineError("residual series have no common time span")
    cols = [f.residuals[f.residuals.shape[0] - length :] for f in fits]
    return np.column_stack(cols), start


def average_residuals(residuals, weights=None) -> np.ndarray:
    """
    Weighted sum of residual series; equal weights when ``weights`` is None.

    ``residuals`` is either a sequence of 1-d series, which are aligned on
    their common trailing span, or a 2-d array with one series per column.
    """
    if isinstance(residuals, np.ndarray) and residuals.ndim == 2:
        R = np.asarray(residuals, dtype=float)
    else:
        cols = [np.asarray(r, dtype=float) for r in residuals]
        length = min(c.shape[0] for c in cols)
        R = np.column_stack([c[c.shape[0] - length :] for c in cols]) if length else np.empty((0, len(cols)))
    if R.shape[0] == 0:
        raise PipelineError("residual series have no common time span")
    if weights is None:
        weights = np.full(R.shape[1], 1.0 / R.shape[1])
    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != R.shape[1]:
        raise ValueError(f"{weights.shape[0]} weights for {R.shape[1]} series")
    return R @ weights


def combine_passes(first: ARFit, second: ARFit) -> tuple[np.ndarray, np.ndarray]:
    """
    Average two AR fits over their common leading coefficients.

    SE of the mean is 0.5 * sqrt(se1^2 + se2^2), treating the passes as
    uncorrelated.
    """
    m = min(first.order, second.order)
    coef = 0.5 * (first.coefficients[:m] + second.coefficients[:m])
    se = 0.5 * np.sqrt(first.standard_errors[:m] ** 2 + second.standard_errors[:m] ** 2)
    return coef, se


def _second_pass_fit(x: np.ndarray, config: PipelineConfig, label: str) -> ARFit:
    if is_constant(x):
        return fit_mean_only(x).with_warnings(f"series {label!r} is constant after removing the shared residual")
    try:
        return fit_identified(x, config.max_lag, config.ar_order_cap)
    except (DegenerateInputError, FitFailureError, ValueError) as exc:
        raise PipelineError(f"second-pass AR fit failed for series {label!r}: {exc}", label) from exc


def fit_ar_garch(series, ar_order: int, p: int, q: int, start_garch=None) -> LegacyFit:
    """
    Joint conditional-likelihood fit of AR(ar_order) + GARCH(p, q) to one series.

    The residuals y_t - mu - sum phi_i y_{t-i} (t >= ar_order) carry the
    GARCH likelihood. AR parameters start at their OLS values, GARCH
    parameters at ``start_garch`` (natural scale, rescaled to the residual
    variance) or the usual moment-based default.
    """
    y = np.ascontiguousarray(series, dtype=float)
    u = int(ar_order)
    if u:
        ols = fit_ar(y, u)
        ar0 = np.r_[ols.spec.intercept, ols.coefficients]
        resid0 = ols.residuals
        X = np.column_stack([np.ones(y.shape[0] - u)] + [y[u - i : y.shape[0] - i] for i in range(1, u + 1)])
    else:
        ar0 = np.array([y.mean()])
        resid0 = y - y.mean()
        X = np.ones((y.shape[0], 1))
    target = y[u:]
    scale = float(resid0.var())
    if start_garch is None:
        g0 = np.r_[0.1 * scale, np.full(q, 0.1 / q), np.full(p, 0.8 / p) if p else np.empty(0)]
    else:
        g0 = np.array(start_garch, dtype=float)
        # match the unconditional variance to this series' residuals
        g0[0] = scale * (1.0 - min(float(np.sum(g0[1:])), 0.99))
    k_ar = ar0.shape[0]

    def negloglik_natural(ar, garch):
        resid = np.ascontiguousarray(target - X @ ar)
        return _recursion(garch, resid, p, q, float(resid.var()), False)[1]

    def objective(z):
        return negloglik_natural(z[:k_ar], _to_natural(z[k_ar:], scale)) / target.shape[0]

    z0 = np.r_[ar0, _to_theta(g0, scale)]
    res = minimize(objective, z0, method="BFGS", options={"gtol": 1e-6, "maxiter": 400})
    if not np.isfinite(res.fun):
        raise FitFailureError("joint AR + GARCH fit failed", best=res.x)
    ar_hat = res.x[:k_ar]
    garch_hat = _to_natural(res.x[k_ar:], scale)
    H = _numerical_hessian(lambda a: negloglik_natural(a, garch_hat), ar_hat)
    se = np.full(k_ar, np.nan)
    if np.all(np.isfinite(H)):
        try:
            L = np.linalg.cholesky(H)
            Linv = np.linalg.inv(L)
            se = np.sqrt(np.einsum("ij,ij->j", Linv, Linv))
        except np.linalg.LinAlgError:
            pass
    return LegacyFit(ar_hat[1:], se[1:], float(ar_hat[0]), garch_hat, -float(res.fun) * target.shape[0])


def _cross_correlation_summary(squared: np.ndarray, labels) -> dict:
    corr = cross_correlation_matrix(squared, labels)
    off = corr[np.triu_indices_from(corr, k=1)]
    counts, edges = np.histogram(off, bins=40, range=(-1.0, 1.0))
    return {
        "n_pairs": int(off.shape[0]),
        "mean": float(off.mean()),
        "median": float(np.median(off)),
        "std": float(off.std()),
        "min": float(off.min()),
        "max": float(off.max()),
        "quantiles": {str(qq): float(np.quantile(off, qq)) for qq in (0.05, 0.25, 0.75, 0.95)},
        "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
    }


def run_pipeline(panel: Panel, config: PipelineConfig | None = None) -> PipelineReport:
    """
    Run the two-pass shared-volatility estimator on ``panel``.

    When the McLeod-Li test finds no ARCH effect in the shared residual, or
    every GARCH candidate fails, the GARCH stage is marked not applicable and
    the report carries AR results only.
    """
    config = config or PipelineConfig()
    if not isinstance(panel, Panel):
        panel = Panel(np.asarray(panel), tuple(f"y{i + 1}" for i in range(np.asarray(panel).shape[1])))
    notes: list[str] = []
    T, K = panel.n_obs, panel.n_series

    fits1 = first_pass(panel, config.max_lag, config.ar_order_cap)
    for label, f in zip(panel.labels, fits1):
        notes.extend(f"{label}: {w}" for w in f.warnings)
    phi1 = np.array([f.first_coefficient for f in fits1])
    if config.weighting == WEIGHTED:
        weights = compute_weights(phi1, config.weight_floor)
        n_clamped = int(np.sum(np.abs(phi1) < config.weight_floor))
        if n_clamped:
            notes.append(f"{n_clamped} series had |phi_1| below {config.weight_floor}; their weights were clamped")
        if np.any(phi1 < 0):
            notes.append(f"{int(np.sum(phi1 < 0))} series had negative phi_1; weights use the absolute value")
    else:
        weights = np.full(K, 1.0 / K)

    resid, start = align_residuals(fits1, T)
    eta_bar = average_residuals(resid, weights)
    if is_constant(eta_bar):
        raise PipelineError("averaged residual series is constant")

    diagnostics: list[DiagnosticResult] = []
    ml = mcleod_li(eta_bar, config.mcleod_li_lags, config.significance_level)
    diagnostics.append(ml)

    selection = None
    qq = None
    if not ml.reject_null and not config.always_fit_garch:
        notes.append("McLeod-Li does not reject on the averaged residuals: no evidence of ARCH, GARCH stage skipped")
    else:
        if not ml.reject_null:
            notes.append("McLeod-Li does not reject on the averaged residuals; GARCH fitted anyway")
        try:
            selection = identify_garch_order(
                eta_bar, config.garch_candidates, config.max_lag, config.n_starts, config.seed
            )
        except (FitFailureError, ValueError) as exc:
            notes.append(f"GARCH stage failed ({exc}); reporting AR results only")
        if selection is not None:
            for order, msg in selection.failures.items():
                notes.append(f"GARCH{order} candidate failed: {msg}")
            best = selection.best
            z = best.standardized_residuals
            lm_lags = max(config.li_mak_lags, best.p + best.q + 1)
            diagnostics.append(li_mak(z, lm_lags, best.p, best.q, config.significance_level))
            qq = qq_normal(z)

    Y = panel.values[start:]
    fits2 = []
    for j, label in enumerate(panel.labels):
        fit = _second_pass_fit(Y[:, j] - eta_bar, config, label)
        notes.extend(f"{label}: {w}" for w in fit.warnings)
        fits2.append(fit)

    final, final_se, disagree = [], [], []
    for f1, f2 in zip(fits1, fits2):
        c, s = combine_passes(f1, f2)
        final.append(c)
        final_se.append(s)
        disagree.append(f1.order != f2.order)
    if any(disagree):
        notes.append(f"{sum(disagree)} series changed AR order between passes; final estimates use shared lags")

    ccs = None
    if K >= 2:
        try:
            ccs = _cross_correlation_summary(resid**2, panel.labels)
        except DegenerateInputError as exc:
            notes.append(f"cross-correlation of squared residuals skipped: {exc}")

    legacy = None
    if config.legacy and selection is not None:
        best = selection.best
        legacy = []
        for label, y, f1 in zip(panel.labels, panel, fits1):
            try:
                legacy.append(fit_ar_garch(y, f1.order, best.p, best.q, best.params))
            except (FitFailureError, ValueError, np.linalg.LinAlgError) as exc:
                notes.append(f"{label}: legacy AR + GARCH fit failed ({exc})")
                legacy.append(None)

    for msg in notes:
        logger.info(msg)
    return PipelineReport(
        labels=panel.labels,
        config=config,
        first_pass=fits1,
        weights=weights,
        aligned_start=start,
        averaged_residuals=eta_bar,
        mcleod_li=ml,
        garch_selection=selection,
        second_pass=fits2,
        final_coefficients=final,
        final_standard_errors=final_se,
        order_disagreement=disagree,
        diagnostics=diagnostics,
        cross_correlation_summary=ccs,
        legacy=legacy,
        warnings=notes,
        qq=qq,
    )
