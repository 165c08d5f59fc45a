"""Cohomological operator, Fischer adjoints, and graded splittings."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from sbcblock.homological import (
    adjoint_op,
    cohomological_op,
    graded_component_split,
    graded_split,
    kernel_ltilde,
    kernel_ltilde_star,
    lie_bracket,
    ltilde,
    ltilde_star,
    scalar_image_residual,
    state_space_dim,
    x0_field,
)
from sbcblock.ratpoly import (
    NSTATE,
    NVARS,
    Z1,
    Z2,
    Ring,
    fischer_inner,
    fischer_inner_vec,
    matrix_rank,
)


@pytest.fixture(scope="module")
def ring():
    return Ring(Fraction(2), Fraction(3))


def _rand_hom(ring, rng, deg):
    """Random z-homogeneous scalar of the given degree."""
    out = ring.zero()
    for a in range(deg + 1):
        key = [0] * NVARS
        key[Z1] = a
        key[Z2] = deg - a
        out = out + ring.monomial(tuple(key), Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
    return out


def _rand_field(ring, rng, deg):
    return [_rand_hom(ring, rng, deg) for _ in range(NSTATE)]


def test_x0_field_is_the_quadratic_leader(ring):
    x0 = x0_field(ring)
    z1 = ring.var(Z1)
    z2 = ring.var(Z2)
    assert (x0[0] - z2.pow(2)).is_zero()
    assert (x0[1] - z1.pow(2)).is_zero()
    for comp in x0[2:]:
        assert comp.is_zero()


def test_ltilde_explicit_form(ring):
    z1 = ring.var(Z1)
    z2 = ring.var(Z2)
    g = z1.pow(2) * z2
    manual = z2.pow(2).mul(g.diff(Z1)) + z1.pow(2).mul(g.diff(Z2))
    assert (ltilde(g) - manual).is_zero()


def test_cubic_difference_spans_the_scalar_kernel(ring):
    z1 = ring.var(Z1)
    z2 = ring.var(Z2)
    cubic = z1.pow(3) - z2.pow(3)
    assert ltilde(cubic).is_zero()
    basis = kernel_ltilde(ring, 3)
    assert len(basis) == 1
    # The basis vector is the cubic difference up to a scalar.
    member = basis[0]
    ratio = member.coefficient({Z1: 3}) / cubic.coefficient({Z1: 3})
    assert (member - cubic.scale(ratio)).is_zero()


def test_scalar_kernel_dimensions(ring):
    # Non-trivial kernels occur exactly at degrees divisible by three,
    # spanned by powers of the cubic difference.
    sizes = {k: len(kernel_ltilde(ring, k)) for k in range(3, 10)}
    assert sizes == {3: 1, 4: 0, 5: 0, 6: 1, 7: 0, 8: 0, 9: 1}
    z1 = ring.var(Z1)
    z2 = ring.var(Z2)
    sq = (z1.pow(3) - z2.pow(3)).pow(2)
    member = kernel_ltilde(ring, 6)[0]
    ratio = member.coefficient({Z1: 6}) / sq.coefficient({Z1: 6})
    assert (member - sq.scale(ratio)).is_zero()


def test_kernel_ltilde_star_members_annihilate(ring):
    for k in (3, 6, 9):
        basis = kernel_ltilde_star(ring, k)
        assert len(basis) == 1
        for member in basis:
            assert ltilde_star(member).is_zero()


def test_scalar_fischer_adjointness_exact(ring):
    rng = np.random.default_rng(5)
    for deg in (2, 3, 4, 5):
        f = _rand_hom(ring, rng, deg)
        g = _rand_hom(ring, rng, deg + 1)
        assert fischer_inner(ltilde(f), g) == fischer_inner(f, ltilde_star(g))


def test_scalar_image_residual_splits_exactly(ring):
    rng = np.random.default_rng(6)
    for deg in (4, 5, 6, 9):
        t = _rand_hom(ring, rng, deg)
        n, u = scalar_image_residual(t)
        assert (t - n - ltilde(u)).is_zero()
        assert ltilde_star(n).is_zero()
        # Orthogonality of the residual to the image.
        probe = _rand_hom(ring, rng, deg - 1)
        assert fischer_inner(n, ltilde(probe)) == 0


def test_degree_nine_residual_shape(ring):
    rng = np.random.default_rng(7)
    t = _rand_hom(ring, rng, 9)
    n, _ = scalar_image_residual(t)
    # ker L~* at degree 9 is one dimensional with coefficient pattern
    # (1/12, -1, 1, -1/12) on (z1^9, z1^6 z2^3, z1^3 z2^6, z2^9).
    c = n.coefficient({Z1: 6, Z2: 3})
    assert n.coefficient({Z1: 9}) == -c * Fraction(1, 12)
    assert n.coefficient({Z1: 3, Z2: 6}) == -c
    assert n.coefficient({Z2: 9}) == c * Fraction(1, 12)


def test_cohomological_op_is_bracket_with_leader(ring):
    rng = np.random.default_rng(8)
    u = _rand_field(ring, rng, 3)
    lhs = cohomological_op(u)
    rhs = lie_bracket(x0_field(ring), u)
    for a, b in zip(lhs, rhs):
        assert (a - b).is_zero()


def test_lie_bracket_antisymmetry(ring):
    rng = np.random.default_rng(9)
    x = _rand_field(ring, rng, 2)
    y = _rand_field(ring, rng, 3)
    fwd = lie_bracket(x, y)
    bwd = lie_bracket(y, x)
    for a, b in zip(fwd, bwd):
        assert (a + b).is_zero()
    for comp in lie_bracket(x, x):
        assert comp.is_zero()


def test_vector_fischer_adjointness_exact(ring):
    rng = np.random.default_rng(10)
    u = _rand_field(ring, rng, 3)
    w = _rand_field(ring, rng, 4)
    assert fischer_inner_vec(cohomological_op(u), w) == fischer_inner_vec(u, adjoint_op(w))


def test_graded_component_split_reconstructs(ring):
    rng = np.random.default_rng(11)
    for deg in (2, 3):
        t = _rand_field(ring, rng, deg)
        split = graded_component_split(t)
        rebuilt = cohomological_op(split.generator)
        for a, b, c in zip(t, split.resonant, rebuilt):
            assert (a - b - c).is_zero()
        probe = _rand_field(ring, rng, deg - 1)
        assert fischer_inner_vec(split.resonant, cohomological_op(probe)) == 0


def test_state_space_dim_counts_vector_monomials():
    for d in range(5):
        assert state_space_dim(d) == NSTATE * comb(d + 5, 5)


def test_graded_split_spans_the_component(ring):
    # The two bases of level 0 together span the degree-1 fields.
    res_basis, img_basis = graded_split(ring, 0)
    assert len(res_basis) + len(img_basis) == state_space_dim(1)
    rows = []
    keys = set()
    for field in res_basis + img_basis:
        for comp in field:
            keys.update(comp.terms)
    keys = sorted(keys)
    for field in res_basis + img_basis:
        row = []
        for comp in field:
            terms = dict(comp.terms)
            row.extend(terms.get(k, Fraction(0)) for k in keys)
        rows.append(row)
    assert matrix_rank(rows) == state_space_dim(1)
    res2, img2 = graded_split(ring, 2)
    assert len(res2) + len(img2) == state_space_dim(3)
