"""Interaction potential: exact form, derivatives, and the expansion."""

from __future__ import annotations

import numpy as np
import pytest

from sbcblock.masses import derive_constants
from sbcblock.potential import (
    potential_exact,
    potential_grad,
    potential_hess,
    potential_series,
)


@pytest.fixture(scope="module")
def c_eq():
    return derive_constants((1, 1, 1, 1))


@pytest.fixture(scope="module")
def c_unequal():
    return derive_constants((1, 2, 3, 4))


def test_leading_term_is_b0_over_x(c_eq):
    series = potential_series(c_eq)
    assert series.coefficient(0, 0, 1) == 4
    assert series.evaluate(0.0, 0.0, 2.0) == pytest.approx(c_eq.b0 / 2.0, rel=1e-15)
    assert potential_exact(0.0, 0.0, 2.0, c_eq) == pytest.approx(c_eq.b0 / 2.0, rel=1e-15)


def test_equal_mass_series_has_no_odd_blocks(c_eq):
    series = potential_series(c_eq, max_z_degree=8)
    assert sorted(series.terms) == [
        (0, 0, 1),
        (0, 4, 3),
        (0, 8, 5),
        (4, 0, 3),
        (4, 4, 5),
        (8, 0, 5),
    ]
    assert series.coefficient(6, 0, 4) is None
    assert series.coefficient(0, 6, 4) is None


def test_unequal_mass_series_includes_cubic_blocks(c_unequal):
    series = potential_series(c_unequal, max_z_degree=8)
    assert (6, 0, 4) in series.terms
    assert (0, 6, 4) in series.terms
    assert series.coefficient(1, 1, 1) is None


def test_exchange_symmetry_of_series_keys(c_unequal):
    series = potential_series(c_unequal, max_z_degree=8)
    swapped = potential_series(derive_constants((3, 4, 1, 2)), max_z_degree=8)
    assert sorted(swapped.terms) == sorted((k2, k1, kx) for (k1, k2, kx) in series.terms)


@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (1, 2, 3, 4)])
def test_series_converges_to_exact(masses):
    c = derive_constants(masses)
    series = potential_series(c, max_z_degree=8)
    rng = np.random.default_rng(7)
    for _ in range(20):
        z1 = float(rng.uniform(-0.1, 0.1))
        z2 = float(rng.uniform(-0.1, 0.1))
        x = float(rng.uniform(1.0, 3.0))
        exact = potential_exact(z1, z2, x, c)
        assert series.evaluate(z1, z2, x) == pytest.approx(exact, rel=1e-10)


def test_series_truncation_error_shrinks_with_radius(c_eq):
    series = potential_series(c_eq, max_z_degree=8)
    errors = []
    for s in (0.3, 0.15, 0.075):
        err = abs(series.evaluate(s, -0.8 * s, 1.1) - potential_exact(s, -0.8 * s, 1.1, c_eq))
        errors.append(err)
    assert errors[0] > errors[1] > errors[2]
    # Truncation at z-degree 8 leaves a z^12 remainder; each halving of
    # the radius should shrink the error by far more than 2^8.
    assert errors[0] / max(errors[1], 1e-300) > 2.0**8


@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (1, 2, 3, 4), (2, 1, 1, 3)])
def test_grad_matches_finite_differences(masses):
    c = derive_constants(masses)
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(8):
        pt = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(1.2, 2.5)])
        grad = np.array(potential_grad(*pt, c))
        for i in range(3):
            step = np.zeros(3)
            step[i] = h
            fd = (potential_exact(*(pt + step), c) - potential_exact(*(pt - step), c)) / (2 * h)
            assert grad[i] == pytest.approx(fd, rel=2e-8, abs=2e-8)


def test_hess_matches_finite_differences(c_unequal):
    rng = np.random.default_rng(13)
    h = 1e-5
    for _ in range(5):
        pt = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(1.2, 2.5)])
        hess = np.array(potential_hess(*pt, c_unequal))
        assert np.allclose(hess, hess.T, rtol=1e-12, atol=1e-12)
        for i in range(3):
            for j in range(3):
                si = np.zeros(3)
                sj = np.zeros(3)
                si[i] = h
                sj[j] = h
                fd = (
                    potential_exact(*(pt + si + sj), c_unequal)
                    - potential_exact(*(pt + si - sj), c_unequal)
                    - potential_exact(*(pt - si + sj), c_unequal)
                    + potential_exact(*(pt - si - sj), c_unequal)
                ) / (4 * h * h)
                assert hess[i, j] == pytest.approx(fd, rel=5e-5, abs=5e-5)


def test_exact_potential_exchange_symmetry(c_eq):
    # Equal masses: swapping the two binaries while flipping the
    # separation sign leaves the potential unchanged.
    assert potential_exact(0.07, -0.05, 1.4, c_eq) == pytest.approx(
        potential_exact(-0.05, 0.07, 1.4, c_eq), rel=1e-14
    )
