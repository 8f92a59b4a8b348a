import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from wavecast.analysis import BetaFit, elbow, fit_beta_curve, nmi_model, reg_inc_beta
from wavecast.exceptions import ConfigurationError
from wavecast.infometrics import NmiPoint

GRID = np.linspace(0.02, 0.98, 15)


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 1.0])
def test_uniform_cdf(x):
    assert abs(reg_inc_beta(x, 1, 1) - x) < 1e-12


@pytest.mark.parametrize("a", [0.5, 2, 7])
def test_symmetric_midpoint(a):
    assert abs(reg_inc_beta(0.5, a, a) - 0.5) < 1e-12


def test_square_closed_form():
    # I_x(2, 1) = x^2; cross-check by integrating the density
    assert abs(reg_inc_beta(0.5, 2, 1) - 0.25) < 1e-12
    quad, _ = integrate.quad(lambda t: 2 * t, 0, 0.5)
    assert abs(reg_inc_beta(0.5, 2, 1) - quad) < 1e-12
    for x in np.linspace(0, 1, 11):
        assert abs(reg_inc_beta(x, 2, 1) - x * x) < 1e-12


@given(x=st.floats(0, 1), a=st.floats(1e-3, 1e3), b=st.floats(1e-3, 1e3))
def test_against_scipy(x, a, b):
    assert abs(reg_inc_beta(x, a, b) - special.betainc(a, b, x)) < 1e-12


@given(x=st.floats(0, 1), a=st.floats(0.01, 200), b=st.floats(0.01, 200))
def test_reflection(x, a, b):
    y = 1.0 - x
    x = 1.0 - y  # exactly complementary pair; 1 - x alone can round to 1
    assert abs(reg_inc_beta(x, a, b) + reg_inc_beta(y, b, a) - 1) < 1e-12


@pytest.mark.parametrize("a,b", [(0.3, 0.3), (2, 5), (50, 0.7), (1, 1)])
def test_monotone(a, b):
    values = [reg_inc_beta(x, a, b) for x in np.linspace(0, 1, 1000)]
    assert all(v2 >= v1 for v1, v2 in zip(values, values[1:]))


@pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
def test_domain(args):
    with pytest.raises(ValueError):
        reg_inc_beta(*args)


def test_model_endpoints():
    assert nmi_model([0.0, 1.0], 2.0, 5.0).tolist() == [1.0, 0.0]


def test_recovers_generating_parameters():
    pts = [NmiPoint(r, float(v)) for r, v in zip(GRID, nmi_model(GRID, 2.0, 5.0))]
    fit = fit_beta_curve(pts)
    assert abs(fit.alpha - 2) < 1e-4 and abs(fit.beta - 5) < 1e-4
    assert fit.converged


def test_identity_curve():
    fit = fit_beta_curve([(r, 1 - r) for r in GRID])
    assert abs(fit.alpha - 1) < 1e-4 and abs(fit.beta - 1) < 1e-4


def test_noisy_fits_within_ten_percent():
    clean = nmi_model(GRID, 2.0, 5.0)
    for seed in range(20):
        noisy = clean + np.random.default_rng(seed).normal(0, 0.01, len(GRID))
        fit = fit_beta_curve(list(zip(GRID, noisy)))
        assert abs(fit.alpha / 2 - 1) < 0.1 and abs(fit.beta / 5 - 1) < 0.1


@given(seed=st.integers(0, 1000))
def test_fit_never_worse_than_start(seed):
    rng = np.random.default_rng(seed)
    values = np.clip(rng.random(len(GRID)), 0, 1)
    fit = fit_beta_curve(list(zip(GRID, values)))
    start = float(np.sum((values - nmi_model(GRID, 1, 1)) ** 2))
    assert fit.sse <= start + 1e-15
    assert 1e-3 <= fit.alpha <= 1e3 and 1e-3 <= fit.beta <= 1e3


def test_fit_ignores_endpoint_rates():
    pts = [(0.0, 1.0), (0.3, 0.7), (0.5, 0.5), (1.0, 0.0)]
    with pytest.raises(ConfigurationError):
        fit_beta_curve(pts)


def test_steepness_report():
    rep = BetaFit(0.5, 3.0, 0.0).steepness_report()
    assert rep["steep_near_zero"] and not rep["steep_near_one"]
    assert abs(reg_inc_beta(rep["median_rate"], 0.5, 3.0) - 0.5) < 1e-9


def test_elbow_example():
    res = elbow([0.4, 0.8, 0.9, 0.99, 0.999], [1, 1, 1, 1, 10])
    assert res.recommended_rate == 0.99 and not res.flat


def test_elbow_linear_is_flat():
    rates = [0.4, 0.6, 0.8, 0.9, 0.999]
    res = elbow(rates, [2 * r + 1 for r in rates])
    assert res.flat and res.recommended_rate == 0.999


def test_elbow_symmetric_knee():
    rates = np.linspace(0, 1, 11)
    rmse = np.maximum(0, rates - 0.5) * 10
    # a hinge at 0.5: the chord is farthest from the corner
    assert elbow(rates, rmse).recommended_rate == 0.5


def test_elbow_tie_goes_to_lower_rate():
    res = elbow([0.1, 0.2, 0.3, 0.4], [0.0, 1.0, 1.0, 0.0])
    assert res.recommended_rate == 0.2


@given(scale=st.floats(1e-3, 1e3), shift=st.floats(-1e3, 1e3), seed=st.integers(0, 100))
def test_elbow_affine_invariance(scale, shift, seed):
    rates = [0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999]
    rmse = np.sort(np.random.default_rng(seed).random(7)) ** 3
    a = elbow(rates, rmse)
    b = elbow(rates, scale * rmse + shift)
    assert a.recommended_rate == b.recommended_rate or a.flat


def test_elbow_input_checks():
    with pytest.raises(ConfigurationError):
        elbow([0.1, 0.2], [1, 2])
    with pytest.raises(ConfigurationError):
        elbow([0.3, 0.2, 0.1], [1, 2, 3])
