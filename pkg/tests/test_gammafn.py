"""Gamma and the special hypergeometric against external oracles."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from sbcblock.gammafn import gamma_fn, hyp2f1_special


def test_gamma_small_integers_and_halves():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-13)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert gamma_fn(1.5) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(x=st.floats(min_value=0.05, max_value=30.0, allow_nan=False))
def test_gamma_matches_scipy_on_positive_axis(x):
    assert gamma_fn(x) == pytest.approx(float(sps.gamma(x)), rel=5e-13)


def test_gamma_negative_non_integers():
    mp.mp.dps = 30
    for x in (-0.5, -5.0 / 6.0, -1.5, -2.3, -7.8, -11.25):
        expected = float(mp.gamma(x))
        assert gamma_fn(x) == pytest.approx(expected, rel=2e-12)


def test_gamma_fractional_arguments_used_by_the_limit_constant():
    mp.mp.dps = 30
    for x in (-5.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, -1.0 / 6.0, 5.0 / 6.0):
        assert gamma_fn(x) == pytest.approx(float(mp.gamma(x)), rel=2e-13)


def test_gamma_poles_raise():
    for x in (0.0, -1.0, -2.0, -7.0):
        with pytest.raises(ValueError):
            gamma_fn(x)


def test_gamma_nan_passthrough():
    assert math.isnan(gamma_fn(float("nan")))


def test_hyp2f1_boundary_and_domain():
    assert hyp2f1_special(0.0) == 1.0
    with pytest.raises(ValueError):
        hyp2f1_special(0.1)


def test_hyp2f1_matches_mpmath_across_regimes():
    mp.mp.dps = 30
    # Covers the Pfaff regime, the regime switch at -2, and the
    # connection formula far on the negative axis.
    for z in (-1e-8, -0.3, -1.0, -1.999, -2.0, -2.001, -5.0, -50.0, -4e3, -1e8):
        expected = float(mp.hyp2f1(0.5, mp.mpf(2) / 3, 1.5, z))
        assert hyp2f1_special(z) == pytest.approx(expected, rel=5e-13), z


@settings(max_examples=60, deadline=None)
@given(z=st.floats(min_value=-1e6, max_value=0.0, allow_nan=False))
def test_hyp2f1_random_negative_axis(z):
    mp.mp.dps = 25
    expected = float(mp.hyp2f1(0.5, mp.mpf(2) / 3, 1.5, z))
    assert hyp2f1_special(z) == pytest.approx(expected, rel=1e-12)


def test_hyp2f1_large_argument_asymptote():
    # 2F1(1/2, 2/3; 3/2; z) ~ A (-z)^(-1/2) as z -> -inf with
    # A = Gamma(3/2) Gamma(1/6) / Gamma(2/3).
    # The correction term decays like (-z)^(-1/6) relative to the leader.
    A = gamma_fn(1.5) * gamma_fn(1.0 / 6.0) / gamma_fn(2.0 / 3.0)
    z = -1e18
    assert hyp2f1_special(z) == pytest.approx(A * (-z) ** -0.5, rel=2e-3)
