"""Transition asymptotics: closed forms, Dulac maps, and predictions."""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from sbcblock.masses import derive_constants
from sbcblock.transition import (
    c_infinity,
    drift_integrand,
    dulac_inner,
    dulac_outer,
    h8_of_nu,
    hbar8,
    hbar8_closed,
    lambda_by_extrapolation,
    lambda_constant,
    predicted_block_map,
    rtilde_h,
    rtilde_h_coefficients,
    section_drift_model,
    smooth_transition,
    transition_series,
)


@pytest.fixture(scope="module")
def c_eq():
    return derive_constants((1, 1, 1, 1))


@pytest.fixture(scope="module")
def c_unequal():
    return derive_constants((1, 2, 3, 4))


def test_quadrature_matches_closed_form_on_the_window():
    for u in np.linspace(-20.0, 20.0, 81):
        assert hbar8(float(u)) == pytest.approx(hbar8_closed(float(u)), abs=1e-10)


def test_hbar8_is_odd():
    for u in (0.5, 3.0, 12.0):
        assert hbar8_closed(-u) == pytest.approx(-hbar8_closed(u), rel=1e-13)
    assert hbar8_closed(0.0) == 0.0


def test_limit_constant_and_extrapolation():
    lam = lambda_constant()
    assert abs(lam - 252.0) < 0.01
    extrap = lambda_by_extrapolation()
    assert abs(extrap - lam) / lam < 0.01
    assert c_infinity() == lam / 2.0


def test_extrapolation_tightens_with_smaller_parameters():
    coarse = abs(lambda_by_extrapolation((0.2, 0.1, 0.05)) - lambda_constant())
    fine = abs(lambda_by_extrapolation((0.05, 0.025, 0.0125)) - lambda_constant())
    assert fine < coarse


def test_rtilde_h_frozen_coefficients():
    assert rtilde_h_coefficients() == [
        Fraction(104, 19),
        Fraction(288, 19),
        Fraction(432, 19),
        Fraction(1440, 19),
        Fraction(-216, 19),
    ]


def test_h8_of_nu_combines_linear_and_scaling_parts():
    for nu in (0.03, 0.07, 0.2):
        expected = (432.0 / 95.0) * nu + 2.0 * nu ** (8.0 / 3.0) * hbar8(1.0 / nu)
        assert h8_of_nu(nu) == pytest.approx(expected, rel=1e-13)


def test_drift_integrand_is_even_and_is_the_derivative():
    for u in (0.4, 1.7, 5.0, 50.0):
        assert drift_integrand(-u) == drift_integrand(u)
    h = 1e-6
    for u in (0.5, 2.0, 8.0):
        fd = (hbar8_closed(u + h) - hbar8_closed(u - h)) / (2 * h)
        assert drift_integrand(u) == pytest.approx(fd, rel=1e-7)


def test_dulac_maps_are_mutually_inverse():
    pt = (1.3, 0.3, -0.05, 0.01, 0.02)
    for nu in (0.05, 0.1, 0.4):
        fwd = dulac_inner(pt, nu)
        assert fwd[1:] == pt[1:]
        back = dulac_outer(fwd, nu)
        assert back[0] == pytest.approx(pt[0], rel=1e-13)
        rev = dulac_inner(dulac_outer(pt, nu), nu)
        assert rev[0] == pytest.approx(pt[0], rel=1e-13)


@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (1, 2, 3, 4)])
def test_smooth_transition_preserves_the_cross_combination(masses):
    c = derive_constants(masses)
    pt = (1.0, 0.3, -0.05, 0.01, 0.02)
    out = smooth_transition(pt, 0.1, c)
    before = pt[2] / c.a2_cbrt + pt[3] / c.a1_cbrt
    after = out[2] / c.a2_cbrt + out[3] / c.a1_cbrt
    assert after == pytest.approx(before, abs=1e-16)
    assert out[0] == pt[0]
    assert out[1] == pt[1]
    assert out[4] == pt[4]


def test_predicted_block_map_scaling(c_eq):
    dh1, dh2 = predicted_block_map(0.01, c_eq)
    assert dh1 == pytest.approx((c_eq.btilde_c / c_eq.a1_cbrt) * 0.01 ** (8.0 / 3.0), rel=1e-13)
    assert dh2 == -dh1
    # Odd in the offset.
    neg1, neg2 = predicted_block_map(-0.01, c_eq)
    assert neg1 == -dh1 and neg2 == -dh2
    # Exponent 8/3 between two offsets.
    big1, _ = predicted_block_map(0.02, c_eq)
    assert math.log2(big1 / dh1) == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_predicted_block_map_side_ratio(c_unequal):
    dh1, dh2 = predicted_block_map(0.01, c_unequal)
    assert dh2 / dh1 == pytest.approx(-((c_unequal.a1 / c_unequal.a2) ** (1.0 / 3.0)), rel=1e-13)


def test_section_drift_model_is_odd(c_eq):
    val = section_drift_model(1.6e-4, 0.2, c_eq)
    assert val != 0.0
    assert section_drift_model(-1.6e-4, 0.2, c_eq) == -val


def test_transition_series_serialises(c_unequal):
    data = json.loads(transition_series(c_unequal).to_json())
    assert data["btilde_c"] == pytest.approx(c_unequal.btilde_c, rel=1e-15)
    assert data["c_inf"] == pytest.approx(lambda_constant() / 2.0, rel=1e-15)
    assert data["dh1_prefactor"] == pytest.approx(c_unequal.btilde_c / c_unequal.a1_cbrt, rel=1e-13)
    assert "hbar8_checks" in data


def test_rtilde_h_matches_its_coefficients():
    # Even polynomial in u with the frozen list as the u^(2k) weights.
    coeffs = rtilde_h_coefficients()
    for u in (0.0, 0.3, 1.0, 2.5, -1.7):
        expected = sum(float(c) * u ** (2 * k) for k, c in enumerate(coeffs))
        assert rtilde_h(u) == pytest.approx(expected, rel=1e-13)
