"""Normal-form engine output against the frozen resonant families."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from sbcblock import families
from sbcblock.masses import derive_constants
from sbcblock.normalform import (
    extract_resonant_families,
    kappa_integral,
    normal_form_for_masses,
)
from sbcblock.ratpoly import E1, E2, P1, P2


def test_equal_mass_families_are_the_frozen_ones(nf_result_eq, kappa_eq):
    rep = extract_resonant_families(nf_result_eq, kappa_eq)
    assert rep.r61 == families.R61
    assert rep.r62 == families.R62
    assert rep.rh == families.RH
    assert rep.kappa7 == families.KAPPA7
    assert rep.exchange_symmetric


def test_frozen_family_values():
    assert families.R61 == {(4, 2): Fraction(-96, 1439), (1, 5): Fraction(312, 7195)}
    assert families.R62 == {
        (6, 0): Fraction(88, 7195),
        (3, 3): Fraction(16, 1439),
        (0, 6): Fraction(-16, 1439),
    }
    assert families.RH == {
        (9, 0): Fraction(4, 19),
        (6, 3): Fraction(-48, 19),
        (3, 6): Fraction(48, 19),
        (0, 9): Fraction(-4, 19),
    }
    assert families.KAPPA7 == {
        (7, 0): Fraction(97, 10073),
        (4, 3): Fraction(-19, 1439),
        (1, 6): Fraction(44, 7195),
    }


def test_rh_shape_is_antisymmetric_under_swap():
    swapped = {(b, a): c for (a, b), c in families.RH.items()}
    assert swapped == {k: -c for k, c in families.RH.items()}


def test_energy_prefactors_track_the_critical_coefficient(nf_result_eq):
    rep = extract_resonant_families(nf_result_eq)
    dc = derive_constants((1, 1, 1, 1))
    assert rep.rh_prefactor_1 == pytest.approx(dc.bc / dc.a1_cbrt, rel=1e-12)
    assert rep.rh_prefactor_2 == pytest.approx(dc.bc / dc.a2_cbrt, rel=1e-12)


@pytest.mark.parametrize("masses", [(1, 2, 3, 4), (2, 1, 1, 3)])
def test_unequal_mass_families(masses):
    result = normal_form_for_masses(masses)
    rep = extract_resonant_families(result, kappa_integral(result))
    assert rep.r61 == families.R61
    assert rep.r62 == families.R62
    assert rep.rh == families.RH
    assert rep.kappa7 == families.KAPPA7
    assert rep.exchange_symmetric
    dc = derive_constants(masses)
    assert rep.rh_prefactor_1 == pytest.approx(dc.bc / dc.a1_cbrt, rel=1e-10)
    assert rep.rh_prefactor_2 == pytest.approx(dc.bc / dc.a2_cbrt, rel=1e-10)


def test_square_blocks_are_mass_independent():
    # The degree-6 corrections to the z equations carry no mass data at
    # all; two unrelated mass vectors give identical coefficient tables.
    # Degree 8 is the lowest truncation whose square blocks are complete.
    rep_a = extract_resonant_families(normal_form_for_masses((1, 2, 3, 4), max_degree=8))
    rep_b = extract_resonant_families(normal_form_for_masses((5, 1, 2, 7), max_degree=8))
    assert rep_a.r61 == rep_b.r61 == families.R61
    assert rep_a.r62 == rep_b.r62 == families.R62
    assert rep_a.rh is None and rep_b.rh is None


def test_incomplete_truncation_is_rejected():
    # At degrees 6 and 7 the square blocks are only partially normalised,
    # and the extractor refuses to report them as families.
    for degree in (6, 7):
        result = normal_form_for_masses((1, 1, 1, 1), max_degree=degree)
        with pytest.raises(ValueError):
            extract_resonant_families(result)


def test_conjugacy_residual_vanishes(nf_result_eq):
    residual = nf_result_eq.conjugacy_residual()
    for comp in residual:
        assert comp.is_zero()


def test_energy_combination_vanishes(nf_result_eq):
    assert nf_result_eq.energy_combination().is_zero()


def test_z_remainders_start_at_degree_six(nf_result_eq):
    rem1, rem2 = nf_result_eq.z_remainders()
    assert rem1.min_degree() == 6
    assert rem2.min_degree() == 6
    assert rem1.degree() <= 9
    assert rem2.degree() <= 9


def test_kappa_is_cubic_difference_plus_corrections(nf_result_eq, kappa_eq):
    kap = kappa_eq.kappa
    assert kap.coefficient({0: 3}) == Fraction(1, 6)
    assert kap.coefficient({1: 3}) == Fraction(-1, 6)
    assert kappa_eq.drift_degree == 10


def test_kappa_drift_has_no_pure_z_terms(kappa_eq):
    # Invariance holds on the zero-deviation slice: every drift monomial
    # carries at least one energy or momentum-correction factor.
    drift = kappa_eq.drift
    assert not drift.is_zero()
    for key in drift.terms:
        assert key[E1] + key[E2] + key[P1] + key[P2] > 0


def test_low_degree_truncation_has_empty_families():
    result = normal_form_for_masses((1, 1, 1, 1), max_degree=5)
    rep = extract_resonant_families(result)
    assert rep.r61 == {}
    assert rep.r62 == {}
    assert rep.rh is None
    assert rep.kappa7 == {}
    assert kappa_integral(result).drift_degree == -1


def test_extraction_rejects_corrupted_reference(nf_result_eq, monkeypatch):
    patched = dict(families.RH)
    patched[(9, 0)] = patched[(9, 0)] + Fraction(1, 1000)
    monkeypatch.setattr(families, "RH", patched)
    with pytest.raises(ValueError):
        extract_resonant_families(nf_result_eq)


def test_result_serialises(nf_result_eq):
    data = json.loads(nf_result_eq.to_json_str())
    assert data["max_degree"] == 9
    assert data["masses"] == ["1", "1", "1", "1"]
    assert "normal_form" in data and "transform" in data
