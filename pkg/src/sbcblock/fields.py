"""Numeric vector fields of the regularised four-body flow.

States are plain float arrays in raw coordinates (not the deviation
variables of the exact engine):

* ``vf_glc``:        (z1, z2, x, h1, h2, y), the doubly regularised flow
                     in the rescaled clock dt = z1^2 z2^2 dtau;
* ``vf_uncoupled``:  same chart with the cross-binary interaction off;
* ``vf_polar``:      (r, theta, x, h1, h2, y) after the radial blow-up
                     z = r (cos theta, sin theta), clock dbar = r dtau.

Each field comes with an analytic Jacobian and the conserved energy.
The square roots sqrt(1 + h_i z_i^2) use the positive branch throughout;
callers keep states inside the branch domain.
"""

from __future__ import annotations

import math

import numpy as np

from .masses import DerivedConstants
from .potential import potential_exact, potential_grad, potential_hess


def _roots(z1, z2, h1, h2):
    r1 = 1.0 + h1 * z1 * z1
    r2 = 1.0 + h2 * z2 * z2
    if r1 < 0.0 or r2 < 0.0:
        raise FloatingPointError(
            "state left the positive branch of sqrt(1 + h z^2)"
        )
    return math.sqrt(r1), math.sqrt(r2)


def vf_glc(state, c: DerivedConstants) -> np.ndarray:
    """Right-hand side of the regularised flow."""
    z1, z2, x, h1, h2, y = state
    s1, s2 = _roots(z1, z2, h1, h2)
    kz1, kz2, kx = potential_grad(z1, z2, x, c)
    b1 = 2.0 / c.a1_cbrt
    b2 = 2.0 / c.a2_cbrt
    z1s, z2s = z1 * z1, z2 * z2
    return np.array([
        z2s * s1,
        z1s * s2,
        c.mu * z1s * z2s * y,
        b1 * z2s * s1 * kz1,
        b2 * z1s * s2 * kz2,
        z1s * z2s * kx,
    ])


def vf_glc_jac(state, c: DerivedConstants) -> np.ndarray:
    """Analytic Jacobian of :func:`vf_glc`."""
    z1, z2, x, h1, h2, y = state
    s1, s2 = _roots(z1, z2, h1, h2)
    kz1, kz2, kx = potential_grad(z1, z2, x, c)
    hess = potential_hess(z1, z2, x, c)
    k11, k12, k1x = hess[0]
    _, k22, k2x = hess[1]
    kx1, kx2, kxx = hess[2]
    b1 = 2.0 / c.a1_cbrt
    b2 = 2.0 / c.a2_cbrt
    z1s, z2s = z1 * z1, z2 * z2
    ds1_z1 = h1 * z1 / s1
    ds1_h1 = z1s / (2.0 * s1)
    ds2_z2 = h2 * z2 / s2
    ds2_h2 = z2s / (2.0 * s2)

    jac = np.zeros((6, 6))
    # z1' = z2^2 s1
    jac[0, 0] = z2s * ds1_z1
    jac[0, 1] = 2.0 * z2 * s1
    jac[0, 3] = z2s * ds1_h1
    # z2' = z1^2 s2
    jac[1, 0] = 2.0 * z1 * s2
    jac[1, 1] = z1s * ds2_z2
    jac[1, 4] = z1s * ds2_h2
    # x' = mu z1^2 z2^2 y
    jac[2, 0] = 2.0 * c.mu * z1 * z2s * y
    jac[2, 1] = 2.0 * c.mu * z1s * z2 * y
    jac[2, 5] = c.mu * z1s * z2s
    # h1' = b1 z2^2 s1 kz1
    jac[3, 0] = b1 * z2s * (ds1_z1 * kz1 + s1 * k11)
    jac[3, 1] = b1 * (2.0 * z2 * s1 * kz1 + z2s * s1 * k12)
    jac[3, 2] = b1 * z2s * s1 * k1x
    jac[3, 3] = b1 * z2s * ds1_h1 * kz1
    # h2' = b2 z1^2 s2 kz2
    jac[4, 0] = b2 * (2.0 * z1 * s2 * kz2 + z1s * s2 * k12)
    jac[4, 1] = b2 * z1s * (ds2_z2 * kz2 + s2 * k22)
    jac[4, 2] = b2 * z1s * s2 * k2x
    jac[4, 4] = b2 * z1s * ds2_h2 * kz2
    # y' = z1^2 z2^2 kx
    jac[5, 0] = z2s * (2.0 * z1 * kx + z1s * kx1)
    jac[5, 1] = z1s * (2.0 * z2 * kx + z2s * kx2)
    jac[5, 2] = z1s * z2s * kxx
    return jac


def vf_uncoupled(state, c: DerivedConstants) -> np.ndarray:
    """The comparison flow with the interaction removed: energies and the
    momentum are exactly constant."""
    z1, z2, x, h1, h2, y = state
    s1, s2 = _roots(z1, z2, h1, h2)
    z1s, z2s = z1 * z1, z2 * z2
    return np.array([
        z2s * s1,
        z1s * s2,
        c.mu * z1s * z2s * y,
        0.0,
        0.0,
        0.0,
    ])


def vf_uncoupled_jac(state, c: DerivedConstants) -> np.ndarray:
    z1, z2, x, h1, h2, y = state
    s1, s2 = _roots(z1, z2, h1, h2)
    z1s, z2s = z1 * z1, z2 * z2
    jac = np.zeros((6, 6))
    jac[0, 0] = z2s * h1 * z1 / s1
    jac[0, 1] = 2.0 * z2 * s1
    jac[0, 3] = z2s * z1s / (2.0 * s1)
    jac[1, 0] = 2.0 * z1 * s2
    jac[1, 1] = z1s * h2 * z2 / s2
    jac[1, 4] = z1s * z2s / (2.0 * s2)
    jac[2, 0] = 2.0 * c.mu * z1 * z2s * y
    jac[2, 1] = 2.0 * c.mu * z1s * z2 * y
    jac[2, 5] = c.mu * z1s * z2s
    return jac


def energy_glc(state, c: DerivedConstants) -> float:
    """Conserved energy H = a1^(1/3) h1/2 + a2^(1/3) h2/2 + mu y^2/2 - K."""
    z1, z2, x, h1, h2, y = state
    return (
        0.5 * c.a1_cbrt * h1
        + 0.5 * c.a2_cbrt * h2
        + 0.5 * c.mu * y * y
        - potential_exact(z1, z2, x, c)
    )


def energy_uncoupled(state, c: DerivedConstants) -> float:
    """Free-motion energy of the uncoupled flow (no interaction term)."""
    _, _, _, h1, h2, y = state
    return 0.5 * c.a1_cbrt * h1 + 0.5 * c.a2_cbrt * h2 + 0.5 * c.mu * y * y


# -- polar blow-up -------------------------------------------------------------


def vf_polar(state, c: DerivedConstants) -> np.ndarray:
    """Radial blow-up of :func:`vf_glc` in the clock dbar = r dtau.

    At r = 0 this restricts to the collision manifold flow
    theta' = cos^3 - sin^3 (independent of the centre variables), with
    hyperbolic equilibria on tan(theta) = 1.
    """
    r, th, x, h1, h2, y = state
    sin, cos = math.sin(th), math.cos(th)
    z1, z2 = r * cos, r * sin
    s1, s2 = _roots(z1, z2, h1, h2)
    kz1, kz2, kx = potential_grad(z1, z2, x, c)
    b1 = 2.0 / c.a1_cbrt
    b2 = 2.0 / c.a2_cbrt
    sc = sin * cos
    return np.array([
        r * sc * (sin * s1 + cos * s2),
        cos**3 * s2 - sin**3 * s1,
        c.mu * r**3 * y * sin * sin * cos * cos,
        b1 * r * sin * sin * s1 * kz1,
        b2 * r * cos * cos * s2 * kz2,
        r**3 * sin * sin * cos * cos * kx,
    ])


def vf_polar_jac(state, c: DerivedConstants) -> np.ndarray:
    """Analytic Jacobian of :func:`vf_polar`."""
    r, th, x, h1, h2, y = state
    sin, cos = math.sin(th), math.cos(th)
    z1, z2 = r * cos, r * sin
    s1, s2 = _roots(z1, z2, h1, h2)
    kz1, kz2, kx = potential_grad(z1, z2, x, c)
    hess = potential_hess(z1, z2, x, c)
    k11, k12, k1x = hess[0]
    _, k22, k2x = hess[1]
    kx1, kx2, kxx = hess[2]
    b1 = 2.0 / c.a1_cbrt
    b2 = 2.0 / c.a2_cbrt
    sin2, cos2 = sin * sin, cos * cos
    sc = sin * cos

    # branch roots: s1 = sqrt(1 + h1 r^2 cos^2), s2 = sqrt(1 + h2 r^2 sin^2)
    ds1_r = h1 * r * cos2 / s1
    ds2_r = h2 * r * sin2 / s2
    ds1_th = -h1 * r * r * sc / s1
    ds2_th = h2 * r * r * sc / s2
    ds1_h1 = r * r * cos2 / (2.0 * s1)
    ds2_h2 = r * r * sin2 / (2.0 * s2)

    # chain rule for the potential evaluated at (r cos, r sin, x)
    dk1_r = k11 * cos + k12 * sin
    dk1_th = -k11 * r * sin + k12 * r * cos
    dk2_r = k12 * cos + k22 * sin
    dk2_th = -k12 * r * sin + k22 * r * cos
    dkx_r = kx1 * cos + kx2 * sin
    dkx_th = -kx1 * r * sin + kx2 * r * cos

    jac = np.zeros((6, 6))

    # r' = r sc (sin s1 + cos s2)
    bracket = sin * s1 + cos * s2
    jac[0, 0] = sc * bracket + r * sc * (sin * ds1_r + cos * ds2_r)
    jac[0, 1] = r * (
        (cos2 - sin2) * bracket
        + sc * (cos * s1 + sin * ds1_th - sin * s2 + cos * ds2_th)
    )
    jac[0, 3] = r * sc * sin * ds1_h1
    jac[0, 4] = r * sc * cos * ds2_h2

    # theta' = cos^3 s2 - sin^3 s1
    jac[1, 0] = cos**3 * ds2_r - sin**3 * ds1_r
    jac[1, 1] = (
        -3.0 * cos2 * sin * s2
        + cos**3 * ds2_th
        - 3.0 * sin2 * cos * s1
        - sin**3 * ds1_th
    )
    jac[1, 3] = -(sin**3) * ds1_h1
    jac[1, 4] = cos**3 * ds2_h2

    # x' = mu r^3 y sin^2 cos^2
    jac[2, 0] = 3.0 * c.mu * r * r * y * sin2 * cos2
    jac[2, 1] = c.mu * r**3 * y * 2.0 * sc * (cos2 - sin2)
    jac[2, 5] = c.mu * r**3 * sin2 * cos2

    # h1' = b1 r sin^2 s1 kz1
    jac[3, 0] = b1 * sin2 * (s1 * kz1 + r * ds1_r * kz1 + r * s1 * dk1_r)
    jac[3, 1] = b1 * r * (
        2.0 * sc * s1 * kz1 + sin2 * ds1_th * kz1 + sin2 * s1 * dk1_th
    )
    jac[3, 2] = b1 * r * sin2 * s1 * k1x
    jac[3, 3] = b1 * r * sin2 * ds1_h1 * kz1

    # h2' = b2 r cos^2 s2 kz2
    jac[4, 0] = b2 * cos2 * (s2 * kz2 + r * ds2_r * kz2 + r * s2 * dk2_r)
    jac[4, 1] = b2 * r * (
        -2.0 * sc * s2 * kz2 + cos2 * ds2_th * kz2 + cos2 * s2 * dk2_th
    )
    jac[4, 2] = b2 * r * cos2 * s2 * k2x
    jac[4, 4] = b2 * r * cos2 * ds2_h2 * kz2

    # y' = r^3 sin^2 cos^2 kx
    jac[5, 0] = 3.0 * r * r * sin2 * cos2 * kx + r**3 * sin2 * cos2 * dkx_r
    jac[5, 1] = (
        r**3 * 2.0 * sc * (cos2 - sin2) * kx + r**3 * sin2 * cos2 * dkx_th
    )
    jac[5, 2] = r**3 * sin2 * cos2 * kxx
    return jac


def energy_polar(state, c: DerivedConstants) -> float:
    r, th, x, h1, h2, y = state
    z1, z2 = r * math.cos(th), r * math.sin(th)
    return energy_glc((z1, z2, x, h1, h2, y), c)


def polar_equilibria() -> tuple[float, float]:
    """The two collision-manifold equilibrium angles (tan theta = 1)."""
    return math.pi / 4.0, -3.0 * math.pi / 4.0


def collision_manifold_rhs(th: float) -> float:
    """theta' restricted to r = 0: cos^3 - sin^3 (centre variables inert)."""
    return math.cos(th) ** 3 - math.sin(th) ** 3


# -- arbitrary-precision variant (extended integrator mode) -------------------


def vf_glc_mp(state, c: DerivedConstants):
    """Like :func:`vf_glc` but element-type agnostic (mpmath-friendly).

    Accepts a sequence of mpmath floats and returns a list; used by the
    extended-precision integrator.  The derived constants enter as exact
    float conversions, which bounds the extended mode's model error at
    the double-precision level of the constants themselves for irrational
    cube roots; for equal masses the constants are exact binary floats.
    """
    from mpmath import mpf, sqrt as mpsqrt

    z1, z2, x, h1, h2, y = state
    s1 = mpsqrt(1 + h1 * z1 * z1)
    s2 = mpsqrt(1 + h2 * z2 * z2)
    terms = (
        (c.d1, c.C2, -c.C4),
        (c.d2, c.C2, c.C3),
        (c.d3, -c.C1, -c.C4),
        (c.d4, -c.C1, c.C3),
    )
    kz1 = mpf(0)
    kz2 = mpf(0)
    kx = mpf(0)
    for d, alpha, beta in terms:
        den = x + alpha * z1 * z1 + beta * z2 * z2
        f = d / (den * den)
        kz1 -= f * 2 * alpha * z1
        kz2 -= f * 2 * beta * z2
        kx -= f
    b1 = 2 / mpf(c.a1) ** (mpf(1) / 3)
    b2 = 2 / mpf(c.a2) ** (mpf(1) / 3)
    z1s, z2s = z1 * z1, z2 * z2
    return [
        z2s * s1,
        z1s * s2,
        c.mu * z1s * z2s * y,
        b1 * z2s * s1 * kz1,
        b2 * z1s * s2 * kz2,
        z1s * z2s * kx,
    ]
