"""Mass parameters and the derived constants of the two-binary system.

Everything downstream (potential coefficients, normal-form scales, the
predicted block-map coefficient) is a function of the four masses.  The
derivation is kept exact: rational masses give rational constants except
for the cube roots a_i**(1/3), which are carried symbolically as
:class:`GammaMono` monomials until a numeric value is requested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .gammafn import gamma_fn
from .ratpoly import G1, G2, RAT, Poly, Ring


def _frac(value) -> Fraction:
    """Exact Fraction from int, float, str or Fraction input."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class MassParams:
    """The four masses, ordered along the line: m1, m2 | m3, m4."""

    m1: Fraction
    m2: Fraction
    m3: Fraction
    m4: Fraction

    @classmethod
    def of(cls, m1, m2, m3, m4) -> "MassParams":
        vals = tuple(_frac(v) for v in (m1, m2, m3, m4))
        if any(v <= 0 for v in vals):
            raise ValueError("masses must be positive")
        return cls(*vals)

    @classmethod
    def from_sequence(cls, seq: Sequence) -> "MassParams":
        if len(seq) != 4:
            raise ValueError("expected exactly four masses")
        return cls.of(*seq)

    def as_floats(self) -> tuple[float, float, float, float]:
        return (float(self.m1), float(self.m2), float(self.m3), float(self.m4))


@dataclass(frozen=True)
class GammaMono:
    """Exact scalar q * g1**e1 * g2**e2 with g_i the cube root of a_i.

    Exponents are normalised to {0, 1, 2}; cube powers are folded into q.
    """

    q: Fraction
    e1: int
    e2: int

    def normalised(self, a1: Fraction, a2: Fraction) -> "GammaMono":
        q, e1, e2 = self.q, self.e1, self.e2
        if e1 >= 3:
            q *= a1 ** (e1 // 3)
            e1 %= 3
        if e2 >= 3:
            q *= a2 ** (e2 // 3)
            e2 %= 3
        return GammaMono(q, e1, e2)

    def __add__(self, other: "GammaMono") -> "GammaMono":
        if (self.e1, self.e2) != (other.e1, other.e2) and self.q and other.q:
            raise ValueError("cannot add monomials with different radical parts")
        if not self.q:
            return other
        return GammaMono(self.q + other.q, self.e1, self.e2)

    def scaled(self, factor: Fraction) -> "GammaMono":
        return GammaMono(self.q * factor, self.e1, self.e2)

    def to_float(self, a1: Fraction, a2: Fraction) -> float:
        m = self.normalised(a1, a2)
        return (
            float(m.q)
            * float(a1) ** (m.e1 / 3.0)
            * float(a2) ** (m.e2 / 3.0)
        )

    def to_poly(self, ring: Ring) -> Poly:
        m = self.normalised(ring.a1, ring.a2)
        return ring.monomial({G1: m.e1, G2: m.e2}, RAT(m.q))


@dataclass(frozen=True)
class ExactConstants:
    """Rational core of the derived constants plus radical monomials."""

    M1: Fraction
    M2: Fraction
    k1: Fraction
    k2: Fraction
    mu: Fraction
    d1: Fraction
    d2: Fraction
    d3: Fraction
    d4: Fraction
    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction
    a1: Fraction
    a2: Fraction
    C1: GammaMono
    C2: GammaMono
    C3: GammaMono
    C4: GammaMono
    b0: Fraction
    b12: GammaMono
    b22: GammaMono
    b13: Fraction
    b23: Fraction
    b14: GammaMono
    b24: GammaMono
    bc: GammaMono

    def ring(self) -> Ring:
        return Ring(self.a1, self.a2)


# Coefficient of the regularity-limit constant:
#   -24 * 3**(1/6) * sqrt(pi) * Gamma(-5/6) / Gamma(2/3)
# (a positive number, about 252.004).
def block_map_limit_constant() -> float:
    return (
        -24.0
        * 3.0 ** (1.0 / 6.0)
        * gamma_fn(0.5)
        * gamma_fn(-5.0 / 6.0)
        / gamma_fn(2.0 / 3.0)
    )


@dataclass(frozen=True)
class DerivedConstants:
    """Float view of every derived constant, with the exact core attached."""

    masses: MassParams
    M1: float
    M2: float
    k1: float
    k2: float
    mu: float
    d1: float
    d2: float
    d3: float
    d4: float
    c1: float
    c2: float
    c3: float
    c4: float
    a1: float
    a2: float
    C1: float
    C2: float
    C3: float
    C4: float
    b0: float
    b12: float
    b22: float
    b13: float
    b23: float
    b14: float
    b24: float
    bc: float
    btilde_c: float
    exact: ExactConstants

    @property
    def a1_cbrt(self) -> float:
        return self.a1 ** (1.0 / 3.0)

    @property
    def a2_cbrt(self) -> float:
        return self.a2 ** (1.0 / 3.0)

    def to_json(self) -> dict:
        ex = self.exact
        numeric = {
            name: getattr(self, name)
            for name in (
                "M1", "M2", "k1", "k2", "mu",
                "d1", "d2", "d3", "d4",
                "c1", "c2", "c3", "c4",
                "a1", "a2", "C1", "C2", "C3", "C4",
                "b0", "b12", "b22", "b13", "b23", "b14", "b24",
                "bc", "btilde_c",
            )
        }

        def mono(m: GammaMono) -> dict:
            n = m.normalised(ex.a1, ex.a2)
            return {"q": str(n.q), "g1_exp": n.e1, "g2_exp": n.e2}

        exact = {
            name: str(getattr(ex, name))
            for name in (
                "M1", "M2", "k1", "k2", "mu",
                "d1", "d2", "d3", "d4",
                "c1", "c2", "c3", "c4",
                "a1", "a2", "b0", "b13", "b23",
            )
        }
        exact.update(
            {
                name: mono(getattr(ex, name))
                for name in ("C1", "C2", "C3", "C4", "b12", "b22", "b14", "b24", "bc")
            }
        )
        return {
            "masses": [str(m) for m in (
                self.masses.m1, self.masses.m2, self.masses.m3, self.masses.m4
            )],
            "numeric": numeric,
            "exact": exact,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def derive_constants(masses) -> DerivedConstants:
    """All derived constants for a mass vector (sequence or MassParams)."""
    if not isinstance(masses, MassParams):
        masses = MassParams.from_sequence(masses)
    m1, m2, m3, m4 = masses.m1, masses.m2, masses.m3, masses.m4

    M1 = m1 * m2 / (m1 + m2)
    M2 = m3 * m4 / (m3 + m4)
    k1 = m1 * m2
    k2 = m3 * m4
    mu = (m1 + m2 + m3 + m4) / ((m1 + m2) * (m3 + m4))
    d1, d2, d3, d4 = m1 * m3, m1 * m4, m2 * m3, m2 * m4
    c1, c2 = M1 / m2, M1 / m1
    c3, c4 = M2 / m4, M2 / m3
    a1 = 16 * M1 * k1**2
    a2 = 16 * M2 * k2**2

    # Quadratic-coefficient scales C_i = a**(1/3) c_j / (8 k M); the
    # rational parts below multiply one power of the cube-root symbol.
    r1 = Fraction(1, 1) / (8 * k1 * M1)
    r2 = Fraction(1, 1) / (8 * k2 * M2)
    C1 = GammaMono(c1 * r1, 1, 0)
    C2 = GammaMono(c2 * r1, 1, 0)
    C3 = GammaMono(c3 * r2, 0, 1)
    C4 = GammaMono(c4 * r2, 0, 1)

    b0 = d1 + d2 + d3 + d4
    # Single-binary series coefficients; the even powers of one cube root
    # normalise to q * g**2, q, q * g for j = 2, 3, 4 respectively.
    q12 = (c1 * r1) ** 2 * (d3 + d4) + (c2 * r1) ** 2 * (d1 + d2)
    q22 = (c4 * r2) ** 2 * (d1 + d3) + (c3 * r2) ** 2 * (d2 + d4)
    b12 = GammaMono(q12, 2, 0)
    b22 = GammaMono(q22, 0, 2)
    b13 = a1 * ((c1 * r1) ** 3 * (d3 + d4) - (c2 * r1) ** 3 * (d1 + d2))
    b23 = a2 * ((c4 * r2) ** 3 * (d1 + d3) - (c3 * r2) ** 3 * (d2 + d4))
    b14 = GammaMono(a1 * ((c1 * r1) ** 4 * (d3 + d4) + (c2 * r1) ** 4 * (d1 + d2)), 1, 0)
    b24 = GammaMono(a2 * ((c4 * r2) ** 4 * (d1 + d3) + (c3 * r2) ** 4 * (d2 + d4)), 0, 1)
    # Coupled resonant coefficient (the z1^4 z2^4 / x^5 weight).
    qc = 6 * (
        (c1 * r1) ** 2 * ((c4 * r2) ** 2 * d3 + (c3 * r2) ** 2 * d4)
        + (c2 * r1) ** 2 * ((c4 * r2) ** 2 * d1 + (c3 * r2) ** 2 * d2)
    )
    bc = GammaMono(qc, 2, 2)

    exact = ExactConstants(
        M1=M1, M2=M2, k1=k1, k2=k2, mu=mu,
        d1=d1, d2=d2, d3=d3, d4=d4,
        c1=c1, c2=c2, c3=c3, c4=c4,
        a1=a1, a2=a2,
        C1=C1, C2=C2, C3=C3, C4=C4,
        b0=b0, b12=b12, b22=b22, b13=b13, b23=b23, b14=b14, b24=b24,
        bc=bc,
    )

    bc_f = bc.to_float(a1, a2)
    return DerivedConstants(
        masses=masses,
        M1=float(M1), M2=float(M2), k1=float(k1), k2=float(k2), mu=float(mu),
        d1=float(d1), d2=float(d2), d3=float(d3), d4=float(d4),
        c1=float(c1), c2=float(c2), c3=float(c3), c4=float(c4),
        a1=float(a1), a2=float(a2),
        C1=C1.to_float(a1, a2), C2=C2.to_float(a1, a2),
        C3=C3.to_float(a1, a2), C4=C4.to_float(a1, a2),
        b0=float(b0),
        b12=b12.to_float(a1, a2), b22=b22.to_float(a1, a2),
        b13=float(b13), b23=float(b23),
        b14=b14.to_float(a1, a2), b24=b24.to_float(a1, a2),
        bc=bc_f,
        btilde_c=bc_f * block_map_limit_constant(),
        exact=exact,
    )


EQUAL_MASSES = MassParams.of(1, 1, 1, 1)
