"""Gamma and the one Gauss hypergeometric this package needs.

The transition asymptotics use Gamma at a handful of fixed fractional
arguments and 2F1(1/2, 2/3; 3/2; z) on the negative real axis.  Both are
implemented here so the library's numerical claims do not depend on an
external special-function stack; scipy.special and mpmath appear only in
the test suite as oracles.
"""

from __future__ import annotations

import math

# Lanczos approximation, g = 7, 9 terms.  Classic double-precision
# coefficient set; relative error below ~1e-13 on the real axis away from
# the poles.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Gamma(x) for real x, poles at the non-positive integers.

    Uses the Lanczos series for x >= 0.5 and the reflection formula
    Gamma(x) Gamma(1-x) = pi / sin(pi x) below.
    """
    if x != x:  # NaN
        return x
    if x <= 0 and x == int(x):
        raise ValueError(f"gamma pole at x={x}")
    if x < 0.5:
        # Reflection; sinpi computed via argument reduction to keep
        # accuracy for large negative x.
        n = math.floor(x)
        frac = x - n
        sinpix = math.sin(math.pi * frac) * (1 if n % 2 == 0 else -1)
        return math.pi / (sinpix * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def _gauss_series(a: float, b: float, c: float, z: float, tol: float = 1e-17) -> float:
    """Plain 2F1 power series; caller guarantees |z| is comfortably < 1."""
    term = 1.0
    total = 1.0
    for k in range(1, 600):
        term *= (a + k - 1.0) * (b + k - 1.0) / ((c + k - 1.0) * k) * z
        total += term
        if abs(term) <= tol * abs(total):
            return total
    raise RuntimeError(f"hypergeometric series did not converge at z={z}")


# Connection coefficients for F(1/2, 2/3; 3/2; z) as z -> -inf:
#   F = A (-z)^(-1/2) + B (-z)^(-2/3) F(2/3, 1/6; 7/6; 1/z)
# The first series terminates because a - c + 1 = 0.
_A_INF = None
_B_INF = None


def _inf_coeffs() -> tuple[float, float]:
    global _A_INF, _B_INF
    if _A_INF is None:
        _A_INF = gamma_fn(1.5) * gamma_fn(1.0 / 6.0) / gamma_fn(2.0 / 3.0)
        _B_INF = (
            gamma_fn(1.5)
            * gamma_fn(-1.0 / 6.0)
            / (gamma_fn(0.5) * gamma_fn(5.0 / 6.0))
        )
    return _A_INF, _B_INF


def hyp2f1_special(z: float) -> float:
    """2F1(1/2, 2/3; 3/2; z) for z <= 0.

    Three regimes, all with series arguments bounded away from 1:

    * z in (-2, 0]: Pfaff transformation, argument z/(z-1) in [0, 2/3];
    * z <= -2: connection formula at infinity, argument 1/z in [-1/2, 0);
      the (-z)^(-1/2) series terminates at its first term.
    """
    if z > 0:
        raise ValueError("hyp2f1_special is implemented for z <= 0 only")
    if z == 0.0:
        return 1.0
    if z > -2.0:
        zeta = z / (z - 1.0)
        return _gauss_series(0.5, 5.0 / 6.0, 1.5, zeta) / math.sqrt(1.0 - z)
    A, B = _inf_coeffs()
    return A * (-z) ** (-0.5) + B * (-z) ** (-2.0 / 3.0) * _gauss_series(
        2.0 / 3.0, 1.0 / 6.0, 7.0 / 6.0, 1.0 / z
    )
