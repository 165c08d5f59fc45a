"""Power-law and companion-constrained fits on synthetic data."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbcblock.fitting import THIRD_GRID, fit_power_law, quasi_regular_fit


def test_third_grid_contents():
    assert THIRD_GRID == (4 / 3, 5 / 3, 7 / 3, 8 / 3, 10 / 3, 11 / 3)


def test_exact_power_law_recovery():
    x = np.geomspace(1e-4, 1e-2, 10)
    fit = fit_power_law(x, 7.3 * x ** (8.0 / 3.0))
    assert fit.exponent == pytest.approx(8.0 / 3.0, abs=1e-12)
    assert fit.coefficient == pytest.approx(7.3, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 10
    assert np.max(np.abs(fit.residuals)) < 1e-12


def test_negative_ordinates_fit_with_signed_coefficient():
    x = np.geomspace(1e-4, 1e-2, 10)
    fit = fit_power_law(x, -7.3 * x**2)
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.coefficient == pytest.approx(-7.3, rel=1e-9)


def test_mixed_signs_are_rejected():
    x = np.geomspace(1e-4, 1e-2, 10)
    y = 7.3 * x**2
    y[3] = -y[3]
    with pytest.raises(ValueError):
        fit_power_law(x, y)
    with pytest.raises(ValueError):
        fit_power_law(np.array([-1e-3, 1e-3, 2e-3, 4e-3]), np.array([1.0, 2.0, 3.0, 4.0]))


@settings(max_examples=40, deadline=None)
@given(
    exponent=st.floats(min_value=0.5, max_value=4.0, allow_nan=False),
    coefficient=st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
)
def test_power_law_recovery_property(exponent, coefficient):
    x = np.geomspace(1e-4, 1e-1, 12)
    fit = fit_power_law(x, coefficient * x**exponent)
    assert fit.exponent == pytest.approx(exponent, abs=1e-9)
    assert fit.coefficient == pytest.approx(coefficient, rel=1e-7)


def test_quasi_regular_fit_separates_companions():
    x = np.geomspace(1e-4, 1e-2, 12)
    y = 7.3 * x ** (8.0 / 3.0) + 0.02 * x + 11.0 * x**3
    fit = quasi_regular_fit(x, y)
    assert fit.exponent == pytest.approx(8.0 / 3.0, abs=1e-12)
    assert fit.coefficient == pytest.approx(7.3, rel=1e-9)
    assert fit.companions[1.0] == pytest.approx(0.02, rel=1e-8)
    assert fit.companions[3.0] == pytest.approx(11.0, rel=1e-6)
    assert fit.subtracted_exponent == pytest.approx(8.0 / 3.0, abs=1e-9)
    assert fit.subtracted_coefficient == pytest.approx(7.3, rel=1e-7)
    # With no noise the winning grid exponent is overwhelmingly better.
    assert fit.residual_ratio > 1e6
    assert fit.null_ratio > 1e6


def test_quasi_regular_fit_prefers_the_true_grid_point():
    x = np.geomspace(1e-4, 1e-2, 12)
    for exponent in (7.0 / 3.0, 8.0 / 3.0, 10.0 / 3.0):
        y = 2.0 * x**exponent + 0.01 * x
        fit = quasi_regular_fit(x, y)
        assert fit.exponent == pytest.approx(exponent, abs=1e-12)


def test_residual_ratio_degrades_gracefully_with_noise():
    # The anomalous part is four orders below the regular companion at
    # the small end of the window, so the multiplicative noise must sit
    # well below that for the grid decision to survive.
    rng = np.random.default_rng(0)
    x = np.geomspace(1e-4, 1e-2, 12)
    clean = 7.3 * x ** (8.0 / 3.0) + 0.02 * x
    noisy = clean * (1.0 + 1e-6 * rng.standard_normal(x.size))
    fit = quasi_regular_fit(x, noisy)
    assert fit.exponent == pytest.approx(8.0 / 3.0, abs=1e-12)
    clean_fit = quasi_regular_fit(x, clean)
    assert fit.residual_ratio < clean_fit.residual_ratio
    assert fit.rms_residual > clean_fit.rms_residual
    # Even at this noise level the grid decision stands by a wide margin.
    assert fit.residual_ratio > 10.0


def test_null_ratio_measures_the_anomalous_part():
    x = np.geomspace(1e-4, 1e-2, 12)
    pure_regular = 0.02 * x + 11.0 * x**3
    fit = quasi_regular_fit(x, pure_regular + 1e-18 * x**2)
    # With essentially no anomalous content the null model explains the
    # data and the ratio collapses.
    assert fit.null_ratio < 10.0


def test_quasi_regular_fit_validations():
    x = np.geomspace(1e-4, 1e-2, 12)
    y = 7.3 * x ** (8.0 / 3.0)
    with pytest.raises(ValueError):
        quasi_regular_fit(x[:6], y[:6])
    xs = np.geomspace(1e-4, 2e-4, 9)
    with pytest.raises(ValueError):
        quasi_regular_fit(xs, 7.3 * xs ** (8.0 / 3.0))


def test_log_companion_option():
    x = np.geomspace(1e-4, 1e-2, 12)
    y = 7.3 * x ** (8.0 / 3.0) + 0.02 * x + 0.5 * x**3 * np.log(x)
    fit = quasi_regular_fit(x, y, with_log_companion=True)
    assert fit.exponent == pytest.approx(8.0 / 3.0, abs=1e-10)
    assert fit.log_companion == pytest.approx(0.5, rel=1e-5)
    plain = quasi_regular_fit(x, 7.3 * x ** (8.0 / 3.0) + 0.02 * x)
    assert plain.log_companion is None
