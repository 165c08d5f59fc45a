"""Exact Taylor expansion of the regularised flow at the collision point.

The collision of both binaries sits at z1 = z2 = 0 on the section
x = x*, h_i = h_i*, y = y*.  This module expands the regularised vector
field around that point as exact-rational polynomials in the ten-slot
alphabet of :mod:`.ratpoly`: deviations (z1, z2, xi, e1, e2, w), symbolic
reference energies (p1, p2) and cube-root symbols (g1, g2).

The expanded field is the input to the normal-form engine; every
coefficient is exact, so the resonant families the engine extracts are
rational numbers, not floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .masses import DerivedConstants
from .ratpoly import E1, E2, G1, G2, P1, P2, RAT, W, XI, Z1, Z2, Poly, Ring


@dataclass(frozen=True)
class ExpansionBase:
    """Base point of the expansion: x*, y* exact, h_i* symbolic."""

    x_star: Fraction = Fraction(1)
    y_star: Fraction = Fraction(0)

    def __post_init__(self):
        if self.x_star <= 0:
            raise ValueError("the expansion is on the branch x > 0")


def _sqrt_series(arg: Poly, max_degree: int) -> Poly:
    """sqrt(1 + arg) as a truncated series; arg must have min degree >= 1."""
    if arg and arg.min_degree() < 1:
        raise ValueError("sqrt series needs a small argument")
    ring = arg.ring
    out = ring.one()
    term = ring.one()
    coeff = RAT(1)
    k = 0
    min_deg = max(arg.min_degree(), 1)
    while min_deg * (k + 1) <= max_degree:
        k += 1
        coeff = coeff * RAT(3 - 2 * k, 2 * k)  # binom(1/2,k)/binom(1/2,k-1)
        term = term.mul(arg, max_degree)
        if term.is_zero():
            break
        out = out + term.scale(coeff)
    return out


def _geometric_series(arg: Poly, max_degree: int) -> Poly:
    """1/(1 + arg) as a truncated series; arg must have min degree >= 1."""
    if arg and arg.min_degree() < 1:
        raise ValueError("geometric series needs a small argument")
    ring = arg.ring
    out = ring.one()
    for _ in range(max_degree):
        out = ring.one() - arg.mul(out, max_degree)
    return out


def potential_poly(
    c: DerivedConstants, base: ExpansionBase, max_degree: int
) -> Poly:
    """The interaction potential as an exact polynomial in the deviations."""
    ex = c.exact
    ring = ex.ring()
    z1, z2, xi = ring.var(Z1), ring.var(Z2), ring.var(XI)
    z1sq, z2sq = z1 * z1, z2 * z2
    inv_xstar = RAT(1) / RAT(base.x_star)

    quad = {
        "C1": ex.C1.to_poly(ring),
        "C2": ex.C2.to_poly(ring),
        "C3": ex.C3.to_poly(ring),
        "C4": ex.C4.to_poly(ring),
    }
    terms = (
        (ex.d1, quad["C2"], -quad["C4"]),
        (ex.d2, quad["C2"], quad["C3"]),
        (ex.d3, -quad["C1"], -quad["C4"]),
        (ex.d4, -quad["C1"], quad["C3"]),
    )
    K = ring.zero()
    for d, alpha, beta in terms:
        w = (xi + alpha.mul(z1sq) + beta.mul(z2sq)).scale(inv_xstar)
        K = K + _geometric_series(w, max_degree).scale(RAT(d) * inv_xstar)
    return K


def glc_field_poly(
    c: DerivedConstants,
    base: ExpansionBase | None = None,
    max_degree: int = 9,
) -> list[Poly]:
    """The regularised field as six exact polynomial components.

    Component order matches the state order (z1, z2, xi, e1, e2, w) where
    xi = x - x*, e_i = h_i - h_i*, w = y - y*.  The branch roots
    sqrt(1 + h_i z_i^2) use the symbolic h_i = p_i + e_i, and the factors
    a_i**(-1/3) are written g_i**2 / a_i.
    """
    if base is None:
        base = ExpansionBase()
    ex = c.exact
    ring = ex.ring()
    z1, z2 = ring.var(Z1), ring.var(Z2)
    e1, e2, w = ring.var(E1), ring.var(E2), ring.var(W)
    p1, p2 = ring.var(P1), ring.var(P2)
    z1sq, z2sq = z1 * z1, z2 * z2

    s1 = _sqrt_series((p1 + e1).mul(z1sq), max_degree)
    s2 = _sqrt_series((p2 + e2).mul(z2sq), max_degree)
    K = potential_poly(c, base, max_degree)
    K_z1 = K.diff(Z1)
    K_z2 = K.diff(Z2)
    K_xi = K.diff(XI)

    # 2 a_i**(-1/3) = 2 g_i**2 / a_i
    half_scale1 = ring.monomial({G1: 2}, RAT(2) / RAT(ex.a1))
    half_scale2 = ring.monomial({G2: 2}, RAT(2) / RAT(ex.a2))
    z12sq = z1sq.mul(z2sq)
    y_poly = ring.const(base.y_star) + w

    f_z1 = z2sq.mul(s1, max_degree)
    f_z2 = z1sq.mul(s2, max_degree)
    f_xi = z12sq.mul(y_poly, max_degree).scale(RAT(ex.mu))
    f_e1 = half_scale1.mul(z2sq).mul(s1, max_degree).mul(K_z1, max_degree)
    f_e2 = half_scale2.mul(z1sq).mul(s2, max_degree).mul(K_z2, max_degree)
    f_w = z12sq.mul(K_xi, max_degree)
    return [f_z1, f_z2, f_xi, f_e1, f_e2, f_w]


def uncoupled_field_poly(
    c: DerivedConstants,
    base: ExpansionBase | None = None,
    max_degree: int = 9,
) -> list[Poly]:
    """The comparison field with the cross-binary interaction removed.

    The binaries evolve as independent regularised two-body problems and
    the separation drifts with constant momentum: the energy and momentum
    components vanish identically.
    """
    if base is None:
        base = ExpansionBase()
    ex = c.exact
    ring = ex.ring()
    z1, z2 = ring.var(Z1), ring.var(Z2)
    e1, e2, w = ring.var(E1), ring.var(E2), ring.var(W)
    p1, p2 = ring.var(P1), ring.var(P2)
    z1sq, z2sq = z1 * z1, z2 * z2
    s1 = _sqrt_series((p1 + e1).mul(z1sq), max_degree)
    s2 = _sqrt_series((p2 + e2).mul(z2sq), max_degree)
    y_poly = ring.const(base.y_star) + w
    return [
        z2sq.mul(s1, max_degree),
        z1sq.mul(s2, max_degree),
        z1sq.mul(z2sq).mul(y_poly, max_degree).scale(RAT(ex.mu)),
        ring.zero(),
        ring.zero(),
        ring.zero(),
    ]


def ring_for(c: DerivedConstants) -> Ring:
    return c.exact.ring()
