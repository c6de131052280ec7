import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sharedvol import DegenerateInputError, Panel
from sharedvol.ar import ARSpec, simulate_ar
from sharedvol.core import (
    cross_correlation_matrix,
    durbin_levinson,
    sample_acf,
    sample_pacf,
    significance_limit,
)


def acf_double_loop(x, max_lag):
    x = [float(v) for v in x]
    n = len(x)
    mean = sum(x) / n
    den = sum((v - mean) ** 2 for v in x)
    out = []
    for k in range(1, max_lag + 1):
        num = 0.0
        for t in range(k, n):
            num += (x[t] - mean) * (x[t - k] - mean)
        out.append(num / den)
    return np.array(out)


def pacf_yule_walker(x, max_lag):
    rho = np.r_[1.0, sample_acf(x, max_lag)]
    out = []
    for k in range(1, max_lag + 1):
        R = np.array([[rho[abs(i - j)] for j in range(k)] for i in range(k)])
        out.append(np.linalg.solve(R, rho[1 : k + 1])[-1])
    return np.array(out)


finite_series = arrays(
    np.float64,
    st.integers(12, 80),
    elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
).filter(lambda a: np.ptp(a) > 1e-3)


def test_acf_alternating():
    assert sample_acf([1, -1, 1, -1], 1)[0] == pytest.approx(-0.75, abs=1e-15)


def test_acf_white_noise_lag1_small():
    x = np.random.default_rng(1).standard_normal(10_000)
    assert abs(sample_acf(x, 1)[0]) < 0.05


def test_acf_errors():
    with pytest.raises(ValueError):
        sample_acf(np.arange(5.0), 5)
    with pytest.raises(DegenerateInputError):
        sample_acf(np.ones(30), 3)


@settings(max_examples=60, deadline=None)
@given(finite_series)
def test_acf_matches_double_loop(x):
    m = min(10, x.shape[0] - 1)
    np.testing.assert_allclose(sample_acf(x, m), acf_double_loop(x, m), rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(finite_series)
def test_acf_bounded(x):
    assert np.all(np.abs(sample_acf(x, min(10, x.shape[0] - 1))) <= 1 + 1e-9)


@settings(max_examples=60, deadline=None)
@given(finite_series)
def test_pacf_matches_yule_walker_solve(x):
    m = min(8, x.shape[0] - 1)
    # Yule-Walker matrices of short noisy series can be near-singular; compare where well-posed
    rho = np.r_[1.0, sample_acf(x, m)]
    R = np.array([[rho[abs(i - j)] for j in range(m)] for i in range(m)])
    if np.linalg.cond(R) > 1e6:
        m = 2
    np.testing.assert_allclose(sample_pacf(x, m), pacf_yule_walker(x, m), rtol=0, atol=1e-8)


def test_pacf_yule_walker_long_series():
    x = simulate_ar(ARSpec((0.5, 0.3)), np.random.default_rng(3).standard_normal(2000))
    np.testing.assert_allclose(sample_pacf(x, 20), pacf_yule_walker(x, 20), rtol=0, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(finite_series)
def test_pacf_lag1_equals_acf(x):
    assert sample_pacf(x, 3)[0] == sample_acf(x, 3)[0]


def test_pacf_ar1_cuts_off():
    T = 5000
    e = np.random.default_rng(11).standard_normal(T + 200)
    x = simulate_ar(ARSpec((0.8,)), e)[200:]
    p = sample_pacf(x, 2)
    assert p[0] == pytest.approx(0.8, abs=0.03)
    assert abs(p[1]) < 2 / np.sqrt(T)


def test_durbin_levinson_ar1_theory():
    rho = 0.6 ** np.arange(1, 6)
    np.testing.assert_allclose(durbin_levinson(rho), [0.6, 0, 0, 0, 0], atol=1e-14)


@pytest.mark.parametrize("n, expected", [(400, 0.1), (100, 0.2), (261, 0.12379689211803)])
def test_significance_limit(n, expected):
    assert significance_limit(n) == pytest.approx(expected, rel=1e-15)


def test_white_noise_pacf_exceedance():
    rng = np.random.default_rng(2024)
    ok = 0
    trials = 400
    for _ in range(trials):
        x = rng.standard_normal(300)
        frac = np.mean(np.abs(sample_pacf(x, 20)) > significance_limit(300))
        ok += frac <= 0.15
    assert ok / trials >= 0.95


def test_cross_correlation_examples():
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal(10_000), rng.standard_normal(10_000)
    C = cross_correlation_matrix(Panel(np.column_stack([a, a, -a, b]), ("a", "a2", "neg", "b")))
    assert C[0, 1] == pytest.approx(1.0)
    assert C[0, 2] == pytest.approx(-1.0)
    assert abs(C[0, 3]) < 0.05
    np.testing.assert_array_equal(C, C.T)
    np.testing.assert_array_equal(np.diag(C), 1.0)
    assert np.all(np.abs(C) <= 1.0)


def test_cross_correlation_names_constant_series():
    x = np.random.default_rng(0).standard_normal((50, 3))
    x[:, 1] = 2.0
    with pytest.raises(DegenerateInputError, match="b"):
        cross_correlation_matrix(Panel(x, ("a", "b", "c")))


def test_panel_validation():
    with pytest.raises(ValueError):
        Panel(np.zeros((10, 2)), ("a", "a"))
    with pytest.raises(ValueError):
        Panel(np.full((10, 1), np.nan), ("a",))
    p = Panel(np.arange(20.0).reshape(10, 2), ("a", "b"))
    assert (p.n_obs, p.n_series) == (10, 2)
    np.testing.assert_array_equal(p[1], np.arange(1.0, 20.0, 2))
