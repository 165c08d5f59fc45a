"""Cross-binary interaction potential in regularised coordinates.

The two binaries sit at separation x with internal coordinates z1, z2;
the four cross attractions have exact denominators

    D1 = x + C2 z1^2 - C4 z2^2      (weight d1)
    D2 = x + C2 z1^2 + C3 z2^2      (weight d2)
    D3 = x - C1 z1^2 - C4 z2^2      (weight d3)
    D4 = x - C1 z1^2 + C3 z2^2      (weight d4)

so K = sum_i d_i / |D_i|.  The branch x > 0 with all D_i > 0 is assumed
throughout (states stay far from the cross collisions D_i = 0).

The expansion of K in powers of 1/x is remarkably sparse: the identities
m2 C1 = m1 C2 and m3 C4 = m4 C3 cancel every odd power of z_i^2 pairing
and every coupled term below total z-degree 8, leaving single-binary
series K1, K2 plus one coupled term  bc z1^4 z2^4 / x^5  at the orders
that matter for the degree-9 normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .masses import DerivedConstants, GammaMono

# Per-term signed quadratic coefficients: (weight name, sign of the
# C-coefficient on z1^2 which is C2 (+) or C1 (-), sign on z2^2 which is
# C3 (+) or C4 (-)).
_TERMS = (
    ("d1", +1, -1),
    ("d2", +1, +1),
    ("d3", -1, -1),
    ("d4", -1, +1),
)


def _term_data(c: DerivedConstants):
    return (
        (c.d1, c.C2, -c.C4),
        (c.d2, c.C2, c.C3),
        (c.d3, -c.C1, -c.C4),
        (c.d4, -c.C1, c.C3),
    )


def potential_exact(z1: float, z2: float, x: float, c: DerivedConstants) -> float:
    """K(z1, z2, x) from the exact four-term sum."""
    total = 0.0
    for d, alpha, beta in _term_data(c):
        total += d / abs(x + alpha * z1 * z1 + beta * z2 * z2)
    return total


def potential_grad(
    z1: float, z2: float, x: float, c: DerivedConstants
) -> tuple[float, float, float]:
    """(dK/dz1, dK/dz2, dK/dx) on the positive branch."""
    g1 = g2 = gx = 0.0
    for d, alpha, beta in _term_data(c):
        D = x + alpha * z1 * z1 + beta * z2 * z2
        f = d / (D * D)
        g1 -= f * 2.0 * alpha * z1
        g2 -= f * 2.0 * beta * z2
        gx -= f
    return g1, g2, gx


def potential_hess(
    z1: float, z2: float, x: float, c: DerivedConstants
) -> tuple[tuple[float, float, float], ...]:
    """Symmetric 3x3 second-derivative matrix in (z1, z2, x) order."""
    h = [[0.0] * 3 for _ in range(3)]
    for d, alpha, beta in _term_data(c):
        D = x + alpha * z1 * z1 + beta * z2 * z2
        inv2 = d / (D * D)
        inv3 = 2.0 * d / (D * D * D)
        dD = (2.0 * alpha * z1, 2.0 * beta * z2, 1.0)
        # K_term = d / D:  dK = -d D' / D^2,  ddK = 2 d D' D' / D^3 - d D'' / D^2
        for i in range(3):
            for j in range(3):
                h[i][j] += inv3 * dD[i] * dD[j]
        h[0][0] -= inv2 * 2.0 * alpha
        h[1][1] -= inv2 * 2.0 * beta
    return tuple(tuple(row) for row in h)


@dataclass(frozen=True)
class PotentialSeries:
    """Expansion of K in z1, z2 and 1/x.

    ``terms`` maps (z1 exponent, z2 exponent, inverse-x exponent) to the
    exact coefficient as a :class:`GammaMono`; ``floats`` is its numeric
    view.  Exponents of 1/x count the full power, so the leading term is
    (0, 0, 1) with coefficient b0.
    """

    terms: dict[tuple[int, int, int], GammaMono]
    floats: dict[tuple[int, int, int], float]
    max_z_degree: int

    def coefficient(self, z1_exp: int, z2_exp: int, invx_exp: int) -> Fraction | None:
        """Rational value of a coefficient, or None if absent/irrational."""
        mono = self.terms.get((z1_exp, z2_exp, invx_exp))
        if mono is None:
            return None
        if mono.e1 or mono.e2:
            return None
        return mono.q

    def evaluate(self, z1: float, z2: float, x: float) -> float:
        total = 0.0
        for (i, j, k), f in self.floats.items():
            total += f * z1**i * z2**j / x**k
        return total


def potential_series(c: DerivedConstants, max_z_degree: int = 8) -> PotentialSeries:
    """Expand the exact potential through the given total z-degree.

    Derived directly from 1/D = (1/x) sum_n (-(alpha z1^2 + beta z2^2)/x)^n,
    so cancellations happen by exact arithmetic instead of by fiat; the
    sparsity asserted in the docstring is therefore testable output.
    """
    ex = c.exact
    sym = {
        +1: (GammaMono(ex.C2.q, 1, 0), GammaMono(ex.C3.q, 0, 1)),
        -1: (GammaMono(-ex.C1.q, 1, 0), GammaMono(-ex.C4.q, 0, 1)),
    }
    weights = {"d1": ex.d1, "d2": ex.d2, "d3": ex.d3, "d4": ex.d4}
    acc: dict[tuple[int, int, int], GammaMono] = {}
    half = max_z_degree // 2
    for name, s1, s2 in _TERMS:
        d = weights[name]
        alpha = sym[s1][0]
        beta = sym[s2][1]
        for n in range(half + 1):
            for j in range(n + 1):
                if 2 * n > max_z_degree:
                    continue
                # coefficient of z1^(2j) z2^(2(n-j)) / x^(n+1)
                q = (
                    Fraction((-1) ** n * comb(n, j))
                    * d
                    * alpha.q**j
                    * beta.q ** (n - j)
                )
                mono = GammaMono(q, j, n - j).normalised(ex.a1, ex.a2)
                key = (2 * j, 2 * (n - j), n + 1)
                if key in acc:
                    acc[key] = acc[key] + mono
                else:
                    acc[key] = mono
    terms = {
        key: m for key, m in acc.items() if m.q != 0
    }
    floats = {key: m.to_float(ex.a1, ex.a2) for key, m in terms.items()}
    return PotentialSeries(terms=terms, floats=floats, max_z_degree=max_z_degree)
