"""Reference resonant families of the collision normal form.

The degree-9 normal form of the double-collision passage carries four
universal z-polynomials; their coefficients are mass-independent (masses
enter only through the scalar prefactors recorded alongside).  The exact
values are frozen here as the package's reference record, so the engine's
output can be compared against them coefficient by coefficient:

* R61, R62: the quadratic-in-energy corrections to the z-equations,
* RH: the degree-9 antisymmetric resonance driving the energy exchange,
  with per-binary prefactor bc * a_i**(-1/3),
* KAPPA7: the degree-7 correction making the transport invariant
  (z1^3 - z2^3)/6 survive to the truncation order.

Keys are (z1 exponent, z2 exponent); values exact rationals.
"""

from __future__ import annotations

from fractions import Fraction

from .ratpoly import Poly, Ring

R61 = {
    (4, 2): Fraction(-96, 1439),
    (1, 5): Fraction(312, 7195),
}

R62 = {
    (6, 0): Fraction(88, 7195),
    (3, 3): Fraction(16, 1439),
    (0, 6): Fraction(-16, 1439),
}

RH = {
    (9, 0): Fraction(4, 19),
    (6, 3): Fraction(-48, 19),
    (3, 6): Fraction(48, 19),
    (0, 9): Fraction(-4, 19),
}

KAPPA7 = {
    (7, 0): Fraction(97, 10073),
    (4, 3): Fraction(-19, 1439),
    (1, 6): Fraction(44, 7195),
}


def z_poly(ring: Ring, coeffs: dict[tuple[int, int], Fraction], swap: bool = False) -> Poly:
    """Build the two-variable family as a ring element (optionally with the
    z-slots exchanged, which is how the families enter the second binary)."""
    if swap:
        return ring.from_terms(
            ((b, a, 0, 0, 0, 0, 0, 0, 0, 0), c) for (a, b), c in coeffs.items()
        )
    return ring.from_terms(
        ((a, b, 0, 0, 0, 0, 0, 0, 0, 0), c) for (a, b), c in coeffs.items()
    )
