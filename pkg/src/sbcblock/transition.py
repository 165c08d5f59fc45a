"""Energy-exchange asymptotics across the double-collision corner.

The degree-9 resonance RH drives a slow exchange between the two binary
energies while an orbit threads the corner where both collision variables
are small.  Along a level set of the transport invariant kappa the exchange
reduces to a one-dimensional integral of a fixed rational density; this
module owns that density, its antiderivative HBAR (by quadrature and in
closed hypergeometric form), the scaling-bridge maps between the corner
charts, and the resulting model for what a section-to-section passage
measurement should see.

Everything here is independent of the masses except through the scalar
prefactors bc * a_i**(-1/3); the density itself has universal rational
coefficients inherited from the frozen resonant families.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .families import RH
from .gammafn import gamma_fn, hyp2f1_special
from .masses import DerivedConstants

__all__ = [
    "lambda_constant",
    "c_infinity",
    "rtilde_h_coefficients",
    "rtilde_h",
    "drift_integrand",
    "hbar8",
    "hbar8_closed",
    "h8_of_nu",
    "lambda_by_extrapolation",
    "dulac_inner",
    "dulac_outer",
    "smooth_transition",
    "predicted_block_map",
    "section_drift_model",
    "TransitionSeries",
    "transition_series",
]


def lambda_constant() -> float:
    """Limit coefficient of the corner exchange, as a Gamma expression.

    Equals -24 * 3**(1/6) * sqrt(pi) * Gamma(-5/6) / Gamma(2/3); the minus
    sign makes the value positive because Gamma(-5/6) < 0.
    """
    return (
        -24.0
        * 3.0 ** (1.0 / 6.0)
        * math.sqrt(math.pi)
        * gamma_fn(-5.0 / 6.0)
        / gamma_fn(2.0 / 3.0)
    )


def c_infinity() -> float:
    """Regularised limit of hbar8 at infinity; half of lambda_constant."""
    return 0.5 * lambda_constant()


def rtilde_h_coefficients() -> list[Fraction]:
    """Even coefficients of the drift density numerator, exact.

    The resonance RH(z1, z2) factors as c * (z1^3 - z2^3) * q(z1, z2).
    In the rotated frame z1 = w + z, z2 = w - z the slice z = 1 collapses
    it to a degree-8 even polynomial in w; returned are the coefficients
    of w^0, w^2, ..., w^8.  Derived directly from the frozen family so a
    transcription slip in either place makes the cross-check fail.
    """
    degree = max(a + b for a, b in RH)
    acc: dict[int, Fraction] = {}
    for (a, b), coeff in RH.items():
        # (w + 1)^a (w - 1)^b, collected by power of w
        for i in range(a + 1):
            bin_a = Fraction(math.comb(a, i))
            for j in range(b + 1):
                sign = -1 if (b - j) % 2 else 1
                term = coeff * bin_a * math.comb(b, j) * sign
                acc[i + j] = acc.get(i + j, Fraction(0)) + term
    if any(acc.get(k, Fraction(0)) for k in range(1, degree + 1, 2)):
        raise AssertionError("drift density lost its even symmetry")
    return [acc.get(k, Fraction(0)) for k in range(0, degree, 2)]


def rtilde_h(u: float) -> float:
    """Drift density numerator at (u, 1) in the rotated frame."""
    coeffs = rtilde_h_coefficients()
    u2 = u * u
    total = 0.0
    power = 1.0
    for c in coeffs:
        total += float(c) * power
        power *= u2
    return total


def drift_integrand(u: float) -> float:
    """Density whose integral is the rescaled energy exchange.

    The level-set parameterisation contributes (1 + 3u^2)**(-11/3) and the
    kappa normalisation the overall 3**(8/3).
    """
    return 3.0 ** (8.0 / 3.0) * (1.0 + 3.0 * u * u) ** (-11.0 / 3.0) * rtilde_h(u)


def hbar8(u_bar: float, rel_tol: float = 1e-12) -> float:
    """Antiderivative of the drift density from 0 to u_bar, by quadrature.

    Odd in u_bar.  Grows like -(216/95) u_bar^{5/3}; the integrand decays
    too slowly for a naive infinite-interval rule, so large arguments are
    integrated piecewise.
    """
    if u_bar == 0.0:
        return 0.0
    if u_bar < 0.0:
        return -hbar8(-u_bar, rel_tol)
    breaks = [0.0]
    b = 1.0
    while b < u_bar:
        breaks.append(b)
        b *= 4.0
    breaks.append(u_bar)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, _ = quad(drift_integrand, lo, hi, epsabs=0.0, epsrel=rel_tol, limit=200)
        total += val
    return total


def hbar8_closed(u_bar: float) -> float:
    """Closed form of hbar8 via the Gauss function 2F1(1/2, 2/3; 3/2; .).

    Independent route used to certify the quadrature.
    """
    u = u_bar
    u2 = u * u
    rational = 9.0 * (u2 * u2 + 2.0 * u2 - 3.0) / (3.0 * u2 + 1.0) ** (5.0 / 3.0)
    gauss = 38.0 * hyp2f1_special(-3.0 * u2)
    return -(72.0 / 95.0) * 3.0 ** (2.0 / 3.0) * u * (rational - gauss)


def h8_of_nu(nu: float) -> float:
    """Exchange accumulated by the corner passage at scale ratio nu.

    The linear term is the section-parameterisation correction; it cancels
    the divergent 5/3-growth of hbar8 exactly, leaving
    lambda * nu^{8/3} * (1 + O(nu^{1/3})) as nu -> 0.
    """
    if nu <= 0.0:
        raise ValueError("the scale ratio must be positive")
    return (432.0 / 95.0) * nu + 2.0 * nu ** (8.0 / 3.0) * hbar8(1.0 / nu)


def lambda_by_extrapolation(nus: tuple[float, ...] = (0.1, 0.05, 0.025)) -> float:
    """Recover the limit coefficient from h8_of_nu at finite arguments.

    The relative remainder is O(nu^{1/3}), so one Richardson step with the
    known order 1/3 on a halving sequence removes it; two steps handle the
    next order as well when three arguments are supplied.
    """
    vals = [h8_of_nu(nu) / nu ** (8.0 / 3.0) for nu in nus]
    order = 1.0 / 3.0
    while len(vals) > 1:
        factor = 2.0**order
        vals = [
            (factor * vals[i + 1] - vals[i]) / (factor - 1.0)
            for i in range(len(vals) - 1)
        ]
        order += 1.0 / 3.0
    return vals[0]


def dulac_inner(point: tuple[float, ...], nu: float) -> tuple[float, ...]:
    """Scaling bridge from the entry section into the corner chart.

    Acts on (v, x, h1, h2, y): the hyperbolic coordinate becomes
    (v / nu)^{1/3} while the centre variables ride along unchanged at
    this order.
    """
    v, *rest = point
    scaled = math.copysign(abs(v / nu) ** (1.0 / 3.0), v / nu)
    return (scaled, *rest)


def dulac_outer(point: tuple[float, ...], nu: float) -> tuple[float, ...]:
    """Scaling bridge from the corner chart back out to the exit section.

    Acts on (u, x, h1, h2, y): u maps to nu * u^3.  Composed with
    dulac_inner it is the identity on the hyperbolic coordinate.
    """
    u, *rest = point
    return (nu * u**3, *rest)


def smooth_transition(
    point: tuple[float, float, float, float, float],
    nu: float,
    c: DerivedConstants,
) -> tuple[float, float, float, float, float]:
    """Model of the corner passage between the sections at scale nu.

    Input and output are (v, x, h1, h2, y) on the entry and exit sections.
    The energies exchange by bc * a_i^{-1/3} * h8_of_nu(nu) * v-scale while
    x and y are unchanged at this order; the combination
    a2^{-1/3} h1 + a1^{-1/3} h2 is preserved exactly by the model.
    """
    v, x, h1, h2, y = point
    ex = c.bc * h8_of_nu(nu) * abs(v) ** (8.0 / 3.0) * math.copysign(1.0, v)
    return (v, x, h1 + ex / c.a1_cbrt, h2 - ex / c.a2_cbrt, y)


def predicted_block_map(v: float, c: DerivedConstants) -> tuple[float, float]:
    """Limiting energy increments of the section-to-section map.

    Odd in the invariant label: the sign of v selects which binary reaches
    its collision first and therefore which energy gains.  Returns
    (dh1, dh2) = (btilde_c a1^{-1/3}, -btilde_c a2^{-1/3}) * sign(v)|v|^{8/3}.
    """
    mag = c.btilde_c * abs(v) ** (8.0 / 3.0) * math.copysign(1.0, v)
    return (mag / c.a1_cbrt, -mag / c.a2_cbrt)


def section_drift_model(s: float, delta: float, c: DerivedConstants) -> float:
    """Predicted dh1 for a passage measured between sections at +-delta.

    At finite delta the measurement sees delta^8 * h8_of_nu(s / delta^3)
    instead of the bare 8/3 power; the two agree as s/delta^3 -> 0.  Odd
    in s by the binary-exchange symmetry of the passage.
    """
    if s == 0.0:
        return 0.0
    nu = abs(s) / delta**3
    return math.copysign(
        c.bc / c.a1_cbrt * delta**8 * h8_of_nu(nu), s
    )


@dataclass(frozen=True)
class TransitionSeries:
    """Quantitative summary of the transition analysis for one mass set.

    Collects the universal numbers (limit coefficient, its Gamma value,
    the tail coefficients checked by quadrature) together with the
    mass-dependent prefactors, ready for JSON serialisation.
    """

    lambda_gamma: float
    lambda_extrapolated: float
    c_inf: float
    tail_one_third: float
    bc: float
    btilde_c: float
    dh1_prefactor: float
    dh2_prefactor: float
    hbar8_checks: tuple[tuple[float, float, float], ...]

    def to_json(self) -> str:
        payload = {
            "lambda_gamma": self.lambda_gamma,
            "lambda_extrapolated": self.lambda_extrapolated,
            "c_inf": self.c_inf,
            "tail_one_third": self.tail_one_third,
            "bc": self.bc,
            "btilde_c": self.btilde_c,
            "dh1_prefactor": self.dh1_prefactor,
            "dh2_prefactor": self.dh2_prefactor,
            "hbar8_checks": [
                {"u": u, "quadrature": q, "closed_form": cf}
                for u, q, cf in self.hbar8_checks
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _tail_one_third() -> float:
    """Coefficient of the u^{-1/3} tail of hbar8, measured numerically."""
    u1, u2 = 2.0e3, 4.0e3
    g1 = hbar8(u1) + (216.0 / 95.0) * u1 ** (5.0 / 3.0) - c_infinity()
    g2 = hbar8(u2) + (216.0 / 95.0) * u2 ** (5.0 / 3.0) - c_infinity()
    # remove the next correction by one extrapolation step at order -1/3
    w1, w2 = g1 * u1 ** (1.0 / 3.0), g2 * u2 ** (1.0 / 3.0)
    return w2 + (w2 - w1) / (2.0**2.0 - 1.0)


def transition_series(c: DerivedConstants) -> TransitionSeries:
    """Assemble the summary record, running both hbar8 routes on a grid."""
    checks = tuple(
        (u, hbar8(u), hbar8_closed(u))
        for u in (-20.0, -5.0, -1.0, -0.25, 0.25, 1.0, 5.0, 20.0)
    )
    lam = lambda_constant()
    return TransitionSeries(
        lambda_gamma=lam,
        lambda_extrapolated=lambda_by_extrapolation(),
        c_inf=0.5 * lam,
        tail_one_third=_tail_one_third(),
        bc=c.bc,
        btilde_c=c.btilde_c,
        dh1_prefactor=c.btilde_c / c.a1_cbrt,
        dh2_prefactor=-c.btilde_c / c.a2_cbrt,
        hbar8_checks=checks,
    )
