"""
GARCH(p, q) with Gaussian innovations.

    eta_t     = sigma_t * eps_t,     eps_t ~ N(0, 1)
    sigma_t^2 = omega + sum_i alpha_i eta_{t-i}^2 + sum_j beta_j sigma_{t-j}^2

``q`` counts the ARCH terms (alpha) and ``p`` the GARCH terms (beta).
Parameter vectors are always laid out as ``[omega, alpha_1..alpha_q,
beta_1..beta_p]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.optimize import minimize
from numba import njit

from ._errors import FitFailureError
from .core import as_series, is_constant, sample_acf, sample_pacf

__all__ = [
    "DEFAULT_CANDIDATES",
    "GARCHFit",
    "GARCHOrderSelection",
    "GARCHSpec",
    "aic",
    "fit_garch",
    "garch_log_likelihood",
    "garch_variance",
    "gaussian_log_likelihood",
    "identify_garch_order",
    "simulate_garch",
    "simulate_garch_from_shocks",
]

BURN_IN = 200
DEFAULT_CANDIDATES = ((1, 1), (2, 1), (1, 2), (2, 2))
_PERSISTENCE_CAP = 1.0 - 1e-6
_LOG_2PI = np.log(2.0 * np.pi)
_SIGMA2_FLOOR = 1e-300


@dataclass(frozen=True)
class GARCHSpec:
    omega: float
    alpha: tuple = (0.0,)
    beta: tuple = ()

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        beta = tuple(float(b) for b in np.atleast_1d(self.beta)) if len(np.atleast_1d(self.beta)) else ()
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "omega", float(self.omega))
        if len(alpha) < 1:
            raise ValueError("GARCH needs at least one ARCH (alpha) term")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if min(alpha + beta) < 0:
            raise ValueError("alpha and beta coefficients must be non-negative")
        if self.persistence >= 1.0:
            raise ValueError(f"sum(alpha) + sum(beta) = {self.persistence} is not below 1")

    @classmethod
    def from_params(cls, params: Sequence[float], p: int, q: int) -> "GARCHSpec":
        params = np.asarray(params, dtype=float)
        return cls(params[0], tuple(params[1 : 1 + q]), tuple(params[1 + q : 1 + q + p]))

    @property
    def p(self) -> int:
        return len(self.beta)

    @property
    def q(self) -> int:
        return len(self.alpha)

    @property
    def persistence(self) -> float:
        return float(sum(self.alpha) + sum(self.beta))

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)

    @property
    def params(self) -> np.ndarray:
        return np.array((self.omega, *self.alpha, *self.beta))

    @property
    def param_names(self) -> list[str]:
        return (
            ["omega"]
            + [f"alpha{i + 1}" for i in range(self.q)]
            + [f"beta{j + 1}" for j in range(self.p)]
        )


def simulate_garch_from_shocks(spec: GARCHSpec, shocks) -> tuple[np.ndarray, np.ndarray]:
    """
    Drive the GARCH recursion with given standard-normal ``shocks``.

    The recursion starts at the unconditional variance (pre-sample squared
    innovations equal it too). Returns ``(eta, sigma)`` with
    ``eta = sigma * shocks`` evaluated elementwise, no burn-in removed.
    """
    eps = np.asarray(shocks, dtype=float)
    n = eps.shape[0]
    q, p = spec.q, spec.p
    alpha, beta = spec.alpha, spec.beta
    v0 = spec.unconditional_variance
    eta2 = [v0] * q
    sig2 = [v0] * p
    sigma = np.empty(n)
    eta = np.empty(n)
    for t in range(n):
        s2 = spec.omega
        for i in range(q):
            s2 += alpha[i] * eta2[-1 - i]
        for j in range(p):
            s2 += beta[j] * sig2[-1 - j]
        s = np.sqrt(s2)
        e = s * eps[t]
        sigma[t] = s
        eta[t] = e
        eta2.append(e * e)
        sig2.append(s2)
    return eta, sigma


def simulate_garch(spec: GARCHSpec, n_obs: int, seed=None, burn_in: int = BURN_IN) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``n_obs`` GARCH innovations and their true conditional sd."""
    if n_obs < 1:
        raise ValueError("n_obs must be positive")
    rng = np.random.default_rng(seed)
    eta, sigma = simulate_garch_from_shocks(spec, rng.standard_normal(n_obs + burn_in))
    return eta[burn_in:], sigma[burn_in:]


@njit(cache=True)
def _recursion(params, x, p, q, backcast, want_grad):
    n = x.shape[0]
    k = 1 + p + q
    sigma2 = np.empty(n)
    dsig = np.zeros((n, k))
    grad = np.zeros(k)
    nll = 0.0
    underflow = False
    for t in range(n):
        s2 = params[0]
        if want_grad:
            dsig[t, 0] = 1.0
        for i in range(q):
            e2 = x[t - 1 - i] ** 2 if t - 1 - i >= 0 else backcast
            s2 += params[1 + i] * e2
            if want_grad:
                dsig[t, 1 + i] = e2
        for j in range(p):
            b = params[1 + q + j]
            if t - 1 - j >= 0:
                s2 += b * sigma2[t - 1 - j]
                if want_grad:
                    dsig[t, 1 + q + j] += sigma2[t - 1 - j]
                    for m in range(k):
                        dsig[t, m] += b * dsig[t - 1 - j, m]
            else:
                s2 += b * backcast
                if want_grad:
                    dsig[t, 1 + q + j] += backcast
        sigma2[t] = s2
        if s2 <= 1e-300:
            underflow = True
            continue
        r = x[t] * x[t] / s2
        nll += 0.5 * (np.log(s2) + r)
        if want_grad:
            w = 0.5 * (1.0 - r) / s2
            for m in range(k):
                grad[m] += w * dsig[t, m]
    if underflow:
        return sigma2, np.inf, grad
    nll += 0.5 * n * np.log(2.0 * np.pi)
    return sigma2, nll, grad


def garch_variance(params, data, p: int, q: int, backcast: float | None = None) -> np.ndarray:
    """
    Conditional variances sigma_{t|t-1}^2 for ``data`` under ``params``.

    Pre-sample squared data and variances are set to ``backcast``
    (default: the sample variance of ``data``). No validity checks, so
    callers may probe slightly outside the parameter space.
    """
    x = np.ascontiguousarray(data, dtype=float)
    if backcast is None:
        backcast = float(x.var())
    sigma2, _, _ = _recursion(np.asarray(params, dtype=float), x, int(p), int(q), float(backcast), False)
    return sigma2


def gaussian_log_likelihood(data, sigma2) -> float:
    """Sum of N(0, sigma2_t) log densities evaluated at ``data``."""
    x = np.asarray(data, dtype=float)
    s2 = np.asarray(sigma2, dtype=float)
    return float(-0.5 * (x.shape[0] * _LOG_2PI + np.sum(np.log(s2) + x * x / s2)))


def garch_log_likelihood(spec: GARCHSpec, data, backcast: float | None = None) -> float:
    """Gaussian log-likelihood of ``data`` under ``spec``."""
    x = as_series(data, min_length=1)
    if x.shape[0] <= spec.p + spec.q:
        raise ValueError(f"need more than p + q = {spec.p + spec.q} observations")
    sigma2 = garch_variance(spec.params, x, spec.p, spec.q, backcast)
    if not np.all(sigma2 > _SIGMA2_FLOOR):
        raise FitFailureError("conditional variance underflow")
    return gaussian_log_likelihood(x, sigma2)


def aic(log_likelihood: float, n_params: int) -> float:
    """Akaike information criterion 2K - 2 lnL."""
    return 2.0 * n_params - 2.0 * log_likelihood


@dataclass(frozen=True)
class GARCHFit:
    spec: GARCHSpec
    standard_errors: np.ndarray
    conditional_variances: np.ndarray
    standardized_residuals: np.ndarray
    log_likelihood: float
    aic: float
    data: np.ndarray = field(repr=False)
    n_starts_converged: int = 0

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def params(self) -> np.ndarray:
        return self.spec.params

    @property
    def param_names(self) -> list[str]:
        return self.spec.param_names

    @property
    def conditional_sd(self) -> np.ndarray:
        return np.sqrt(self.conditional_variances)

    @property
    def tvalues(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.params / self.standard_errors

    @property
    def pvalues(self) -> np.ndarray:
        """Two-sided normal p-values; NaN where the standard error is unavailable."""
        return 2.0 * stats.norm.sf(np.abs(self.tvalues))

    def is_significant(self, name: str, level: float = 0.05) -> bool:
        pv = self.pvalues[self.param_names.index(name)]
        return bool(np.isfinite(pv) and pv < level)

    def summary_table(self) -> list[dict]:
        return [
            {"name": n, "estimate": float(e), "std_error": float(s), "t_value": float(t), "p_value": float(pv)}
            for n, e, s, t, pv in zip(self.param_names, self.params, self.standard_errors, self.tvalues, self.pvalues)
        ]


# -- optimisation in an unconstrained parameterisation ------------------------
#
# theta = [log(omega / v), z_1..z_{q+p}] with v the sample variance, and
#     c_k = CAP * exp(z_k) / (1 + sum exp(z))
# so every alpha/beta is positive and their sum stays below CAP.


def _to_natural(theta: np.ndarray, scale: float) -> np.ndarray:
    z = theta[1:]
    m = max(0.0, float(np.max(z))) if z.size else 0.0
    ez = np.exp(z - m)
    coefs = _PERSISTENCE_CAP * ez / (np.exp(-m) + ez.sum())
    return np.r_[scale * np.exp(theta[0]), coefs]


def _to_theta(params: np.ndarray, scale: float) -> np.ndarray:
    coefs = np.clip(np.asarray(params[1:], dtype=float), 1e-8, None)
    frac = coefs / _PERSISTENCE_CAP
    total = frac.sum()
    if total >= 1.0:
        frac = frac * (1.0 - 1e-4) / total
        total = frac.sum()
    # exp(z_k) = frac_k * (1 + S) with S / (1 + S) = total
    one_plus_s = 1.0 / (1.0 - total)
    return np.r_[np.log(params[0] / scale), np.log(frac * one_plus_s)]


def _negloglik(params, x, p, q, backcast) -> float:
    return _recursion(np.asarray(params, dtype=float), x, p, q, backcast, False)[1]


def _coef_jacobian_apply(theta: np.ndarray, params: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Chain rule from a natural-parameter gradient to the theta gradient."""
    out = np.empty_like(g)
    out[0] = g[0] * params[0]
    pi = params[1:] / _PERSISTENCE_CAP
    gc = g[1:]
    out[1:] = _PERSISTENCE_CAP * pi * (gc - pi @ gc)
    return out


def _default_start(p: int, q: int, scale: float) -> np.ndarray:
    return np.r_[0.1 * scale, np.full(q, 0.1 / q), np.full(p, 0.8 / p) if p else np.empty(0)]


def _numerical_hessian(f, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    n = x.shape[0]
    h = rel_step * np.maximum(np.abs(x), 1e-4)
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _standard_errors(params, x, p, q, backcast) -> np.ndarray:
    se = np.full(params.shape[0], np.nan)
    # coefficients pinned at the positivity boundary have no usable curvature
    free = np.ones(params.shape[0], dtype=bool)
    free[1:] = params[1:] > 1e-6
    idx = np.flatnonzero(free)

    def sub_negloglik(sub):
        full = params.copy()
        full[idx] = sub
        return _negloglik(full, x, p, q, backcast)

    H = _numerical_hessian(sub_negloglik, params[idx])
    if not np.all(np.isfinite(H)):
        return se
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return se
    Linv = np.linalg.inv(L)
    var = np.einsum("ij,ij->j", Linv, Linv)
    se[idx] = np.sqrt(var)
    return se


def fit_garch(
    data,
    p: int = 1,
    q: int = 1,
    n_starts: int = 5,
    seed: int = 0,
    starts: Sequence[Sequence[float]] = (),
) -> GARCHFit:
    """
    Maximum-likelihood GARCH(p, q) fit.

    Runs BFGS with the analytic gradient in a transformed space that keeps
    omega > 0, every coefficient >= 0 and their sum below 1 - 1e-6. Starts:
    the moment-based default (omega = 0.1 var, alpha = 0.1, beta = 0.8,
    split evenly across lags), ``n_starts - 1`` jittered copies and any
    extra ``starts`` given in natural parameters. The best optimum wins.
    Standard errors come from the inverse numerical Hessian; they are NaN
    when the Hessian is not positive definite or a coefficient sits on
    the zero boundary.

    Raises
    ------
    FitFailureError
        If no start converges. ``best`` holds the best parameters seen.
    """
    x = as_series(data, min_length=1)
    x = np.ascontiguousarray(x)
    if x.shape[0] < 50:
        raise ValueError(f"GARCH fitting needs at least 50 observations, got {x.shape[0]}")
    if not (0 <= p <= 2 and 1 <= q <= 2):
        raise ValueError(f"unsupported GARCH order p={p}, q={q}")
    if is_constant(x):
        raise FitFailureError("cannot fit GARCH to a constant series")
    scale = float(x.var())
    backcast = scale
    rng = np.random.default_rng(seed)

    base = _to_theta(_default_start(p, q, scale), scale)
    thetas = [base]
    for _ in range(max(n_starts, 1) - 1):
        thetas.append(base + rng.normal(0.0, 0.5, size=base.shape[0]))
    thetas.extend(_to_theta(np.asarray(s, dtype=float), scale) for s in starts)

    n = x.shape[0]

    def objective(theta):
        params = _to_natural(theta, scale)
        _, nll, g = _recursion(params, x, p, q, backcast, True)
        if not np.isfinite(nll):
            return np.inf, np.zeros_like(theta)
        return nll / n, _coef_jacobian_apply(theta, params, g) / n

    best = None
    converged = 0
    for theta0 in thetas:
        res = minimize(objective, theta0, jac=True, method="BFGS", options={"gtol": 1e-7, "maxiter": 500})
        if not np.isfinite(res.fun):
            continue
        # BFGS often stops on precision loss right at the optimum; accept a flat gradient
        ok = res.success or np.max(np.abs(res.jac)) < 1e-5
        converged += bool(ok)
        if best is None or res.fun < best.fun:
            best = res
    if best is None or converged == 0:
        point = None if best is None else _to_natural(best.x, scale)
        raise FitFailureError(f"GARCH({p},{q}) optimisation did not converge", best=point)

    params = _to_natural(best.x, scale)
    spec = GARCHSpec.from_params(params, p, q)
    sigma2 = garch_variance(params, x, p, q, backcast)
    loglik = gaussian_log_likelihood(x, sigma2)
    se = _standard_errors(params, x, p, q, backcast)
    return GARCHFit(
        spec=spec,
        standard_errors=se,
        conditional_variances=sigma2,
        standardized_residuals=x / np.sqrt(sigma2),
        log_likelihood=loglik,
        aic=aic(loglik, 1 + p + q),
        data=x,
        n_starts_converged=converged,
    )


@dataclass(frozen=True)
class GARCHOrderSelection:
    """AIC comparison over candidate GARCH orders."""

    order: tuple
    fits: dict
    aic: dict
    failures: dict
    squared_acf: np.ndarray
    squared_pacf: np.ndarray

    @property
    def best(self) -> GARCHFit:
        return self.fits[self.order]


def _pad_start(fit: GARCHFit, p: int, q: int) -> np.ndarray:
    alpha = np.zeros(q)
    beta = np.zeros(p)
    alpha[: fit.q] = fit.spec.alpha[:q]
    beta[: min(fit.p, p)] = fit.spec.beta[:p]
    return np.r_[fit.spec.omega, np.clip(alpha, 1e-4, None), np.clip(beta, 1e-4, None)]


def identify_garch_order(
    data,
    candidates: Sequence[tuple] = DEFAULT_CANDIDATES,
    max_lag: int = 20,
    n_starts: int = 5,
    seed: int = 0,
) -> GARCHOrderSelection:
    """
    Fit each candidate ``(p, q)`` and keep the lowest AIC.

    Larger candidates are also started from the optimum of every smaller
    nested candidate already fitted, so a nested model never ends up
    with a higher likelihood than its sub-model. The correlogram of the
    squared data is returned alongside as supporting evidence.
    """
    x = as_series(data)
    if x.shape[0] < 100:
        raise ValueError(f"order identification needs at least 100 observations, got {x.shape[0]}")
    x2 = x * x
    lags = min(max_lag, x.shape[0] - 1)
    sq_acf = sample_acf(x2, lags)
    sq_pacf = sample_pacf(x2, lags)

    fits: dict = {}
    failures: dict = {}
    for p, q in sorted(candidates, key=lambda o: (o[0] + o[1], o)):
        nested = [_pad_start(f, p, q) for (fp, fq), f in fits.items() if fp <= p and fq <= q]
        try:
            fits[(p, q)] = fit_garch(x, p, q, n_starts=n_starts, seed=seed, starts=nested)
        except FitFailureError as exc:
            failures[(p, q)] = str(exc)
    if not fits:
        raise FitFailureError(f"every GARCH candidate failed: {failures}")
    aics = {order: fits[order].aic for order in candidates if order in fits}
    order = min(aics, key=lambda o: (aics[o], o[0] + o[1]))
    return GARCHOrderSelection(order, fits, aics, failures, sq_acf, sq_pacf)
