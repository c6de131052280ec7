import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharedvol import DegenerateInputError, FitFailureError
from sharedvol.ar import (
    ARSpec,
    ar_signature,
    fit_ar,
    fit_identified,
    fit_mean_only,
    identify_ar_order,
    is_stationary,
    simulate_ar,
)
from sharedvol.core import sample_acf


def sim(coefs, T, seed, burn=200, intercept=0.0):
    e = np.random.default_rng(seed).standard_normal(T + burn)
    return simulate_ar(ARSpec(tuple(coefs), intercept), e)[burn:]


def test_simulate_identity_and_recursion():
    e = np.array([0.3, -1.2, 2.0])
    np.testing.assert_array_equal(simulate_ar(ARSpec(()), e), e)
    np.testing.assert_allclose(simulate_ar(ARSpec((0.5,)), [1, 0, 0]), [1, 0.5, 0.25])


def test_simulate_presample_at_intercept():
    y = simulate_ar(ARSpec((0.5,), intercept=2.0), np.zeros(4))
    # Y_t = 2 + 0.5 Y_{t-1} with Y_0 = 2
    np.testing.assert_allclose(y, [3.0, 3.5, 3.75, 3.875])


def test_simulate_rejects_nonstationary():
    with pytest.raises(ValueError):
        simulate_ar(ARSpec((1.0,)), np.zeros(5))
    assert not is_stationary((0.5, 0.6))
    assert is_stationary((0.5, 0.3))


def test_simulate_small_phi_acf():
    hits = [abs(sample_acf(sim([0.05], 300, s), 1)[0] - 0.05) < 0.12 for s in range(200)]
    assert np.mean(hits) >= 0.95


def _rate(coefs, T, target, trials=200, seed0=0):
    return np.mean([identify_ar_order(sim(coefs, T, seed0 + s)) == target for s in range(trials)])


def test_identify_white_noise():
    assert _rate([], 10_000, 0, trials=100) >= 0.90


def test_identify_ar1():
    assert _rate([0.8], 2000, 1) >= 0.90


def test_identify_ar2():
    assert _rate([0.5, 0.3], 2000, 2) >= 0.80


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 8))
def test_identify_within_cap(seed, cap):
    x = sim([0.9, -0.5, 0.3, -0.2, 0.1, 0.05], 400, seed)
    u = identify_ar_order(x, 20, cap)
    assert 0 <= u <= cap


def test_identify_constant_series():
    with pytest.raises(DegenerateInputError):
        identify_ar_order(np.full(50, 3.0))


def test_fit_noiseless_ar1():
    y = 0.5 ** np.arange(30)
    fit = fit_ar(y, 1)
    assert fit.coefficients[0] == pytest.approx(0.5, abs=1e-10)
    assert np.max(np.abs(fit.residuals)) < 1e-12
    assert fit.residuals.shape == (29,)


@pytest.mark.parametrize("coefs", [(0.6,), (0.5, 0.3), (0.4, -0.2, 0.1)])
def test_fit_noiseless_rss(coefs):
    u = len(coefs)
    rng = np.random.default_rng(1)
    y = list(rng.standard_normal(u))
    for _ in range(200):
        y.append(1.5 + sum(c * y[-i - 1] for i, c in enumerate(coefs)))
    fit = fit_ar(np.array(y), u)
    assert np.sum(fit.residuals**2) < 1e-16 * len(y)
    np.testing.assert_allclose(fit.coefficients, coefs, atol=1e-9)


def test_fit_consistency():
    fit = fit_ar(sim([0.8], 5000, 42), 1)
    assert fit.coefficients[0] == pytest.approx(0.8, abs=0.02)
    assert fit.standard_errors[0] == pytest.approx(np.sqrt((1 - 0.64) / 5000), rel=0.1)


def test_fit_white_noise_calibration():
    T = 300
    inside = [abs(fit_ar(np.random.default_rng(s).standard_normal(T), 1).coefficients[0]) < 2 / np.sqrt(T) for s in range(400)]
    assert 0.92 <= np.mean(inside) <= 0.98


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_ols_matches_normal_equations(seed, u):
    x = sim([0.5, 0.2, -0.1, 0.05][:u], 120, seed, intercept=0.7)
    fit = fit_ar(x, u)
    X = np.column_stack([np.ones(len(x) - u)] + [x[u - i : len(x) - i] for i in range(1, u + 1)])
    beta = np.linalg.solve(X.T @ X, X.T @ x[u:])
    np.testing.assert_allclose(np.r_[fit.spec.intercept, fit.coefficients], beta, rtol=0, atol=1e-9)
    assert np.all(fit.standard_errors >= 0)
    assert fit.residuals.shape == (len(x) - u,)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_fit_idempotent(seed, u):
    x = sim([0.6, -0.2, 0.1][:u], 150, seed)
    fit = fit_ar(x, u)
    rebuilt = np.r_[x[:u], fit.fitted_values + fit.residuals]
    np.testing.assert_allclose(fit_ar(rebuilt, u).coefficients, fit.coefficients, atol=1e-10)


def test_fit_errors():
    with pytest.raises(FitFailureError):
        fit_ar(np.full(40, 1.0), 1)
    with pytest.raises(ValueError):
        fit_ar(np.arange(8.0), 2)
    with pytest.raises(ValueError):
        fit_ar(np.arange(40.0), 0)


def test_mean_only_and_identified():
    x = np.random.default_rng(9).standard_normal(500) + 3.0
    m = fit_mean_only(x)
    assert m.order == 0 and m.first_coefficient == 0.0
    assert m.spec.intercept == pytest.approx(x.mean())
    np.testing.assert_allclose(m.residuals, x - x.mean())
    f = fit_identified(sim([0.8], 1000, 4))
    assert f.order == 1 and f.coefficients[0] == pytest.approx(0.8, abs=0.06)


def test_ma_signature_is_flagged():
    e = np.random.default_rng(8).standard_normal(3001)
    ma = e[1:] + 0.9 * e[:-1]
    assert ar_signature(ma) in ("ma", "arma")
    assert any("component" in w for w in fit_identified(ma).warnings)
    assert ar_signature(sim([0.8], 2000, 1)) == "ar"
