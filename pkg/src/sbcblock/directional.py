"""Directional blow-up charts of the rotated normal form.

In the diagonal frame (zt1, zt2) = ((z1+z2)/2, (z1-z2)/2) the collision
passage runs close to the zt1-axis.  Two directional charts cover it:

* chart 1: zt1 = u, zt2 = u v, clock du_hat = u dtau
  (the passage chart; u runs from -delta through 0 to +delta),
* chart 2: zt1 = ubar vbar, zt2 = vbar, clock dbar = vbar dtau
  (the fibre chart covering zt2 away from 0).

Both fields are produced by exact substitution into the rotated normal
form, followed by exact division by the clock factor; nothing is
transcribed.  On top of chart 1 the normal-form coordinates (u, v) are
built from the first integral: v = kappa / u^3, plus energy corrections
u^8 * (coefficient) * v that cancel the lowest-order resonant drift; the
coefficient is again derived, by reading the u^8 v term of the chart
field and solving the one-dimensional matching equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .masses import DerivedConstants
from .normalform import (
    KappaResult,
    NormalFormResult,
    kappa_integral,
    rotate_pi4,
    rotate_scalar_pi4,
)
from .ratpoly import (
    E1,
    E2,
    G1,
    G2,
    NSTATE,
    P1,
    P2,
    RAT,
    Poly,
    Ring,
    Z1,
    Z2,
    state_degree,
)


def _subs_exact(polys: list[Poly], sub: dict[int, Poly]) -> list[Poly]:
    return [p.subs(sub) for p in polys]


@dataclass
class NFChartMap:
    """Chart-1 normal-form coordinates and their inverse.

    ``v_poly`` expresses v in the chart variables (slots: z1 = u,
    z2 = v_hat, energies e_i, parameters p_i); ``vhat_series`` inverts it
    as a polynomial in (u, v, e1, e2) to the stated degree.  ``h1_corr``
    and ``h2_corr`` are constant polynomials (radical monomials) c_i with

        h_i_nf = h_i + c_i * u^8 * v_hat.
    """

    v_poly: Poly
    vhat_series: Poly
    h1_corr: Poly
    h2_corr: Poly
    inverse_degree: int
    _dv_dvhat: Poly | None = None

    def _param_values(self, c: DerivedConstants, h1_star: float, h2_star: float):
        return {
            P1: h1_star, P2: h2_star,
            G1: c.a1 ** (1.0 / 3.0), G2: c.a2 ** (1.0 / 3.0),
        }

    def forward(
        self,
        u_hat: float,
        v_hat: float,
        h1: float,
        h2: float,
        c: DerivedConstants,
        h1_star: float,
        h2_star: float,
    ) -> tuple[float, float, float, float]:
        """(u, v, h1_nf, h2_nf) from chart-1 coordinates and raw energies."""
        pv = self._param_values(c, h1_star, h2_star)
        e1, e2 = h1 - h1_star, h2 - h2_star
        state = (u_hat, v_hat, 0.0, e1, e2, 0.0)
        v = _eval_state(self.v_poly, state, pv)
        c1 = _eval_state(self.h1_corr, (0.0,) * 6, pv)
        c2 = _eval_state(self.h2_corr, (0.0,) * 6, pv)
        shift = u_hat**8 * v_hat
        return u_hat, v, h1 + c1 * shift, h2 + c2 * shift

    def backward(
        self,
        u: float,
        v: float,
        h1_nf: float,
        h2_nf: float,
        c: DerivedConstants,
        h1_star: float,
        h2_star: float,
    ) -> tuple[float, float, float, float]:
        """Numerical inverse of :meth:`forward`.

        The truncated reversion series seeds a Newton iteration on
        v_poly(u, ., e) = v, so the round trip closes to machine
        precision rather than to the series order.
        """
        pv = self._param_values(c, h1_star, h2_star)
        c1 = _eval_state(self.h1_corr, (0.0,) * 6, pv)
        c2 = _eval_state(self.h2_corr, (0.0,) * 6, pv)
        u8 = u**8
        e1, e2 = h1_nf - h1_star, h2_nf - h2_star
        v_hat = _eval_state(self.vhat_series, (u, v, 0.0, e1, e2, 0.0), pv)
        if self._dv_dvhat is None:
            self._dv_dvhat = self.v_poly.diff(Z2)
        scale = 1.0 + abs(v)
        for _ in range(60):
            # raw energies consistent with the current v_hat guess
            e1 = h1_nf - c1 * u8 * v_hat - h1_star
            e2 = h2_nf - c2 * u8 * v_hat - h2_star
            state = (u, v_hat, 0.0, e1, e2, 0.0)
            f = _eval_state(self.v_poly, state, pv) - v
            if abs(f) <= 1e-15 * scale:
                break
            df = _eval_state(self._dv_dvhat, state, pv)
            v_hat -= f / df
        else:
            raise ArithmeticError(
                "normal-form chart inversion did not converge; the point "
                "is outside the chart tube"
            )
        shift = u8 * v_hat
        return u, v_hat, h1_nf - c1 * shift, h2_nf - c2 * shift


def _eval_state(p: Poly, state, param_values) -> float:
    total = 0.0
    for key, coeff in p.terms.items():
        t = float(coeff)
        for s in range(6):
            e = key[s]
            if e:
                t *= state[s] ** e
        for s, val in ((P1, param_values[P1]), (P2, param_values[P2]),
                       (G1, param_values[G1]), (G2, param_values[G2])):
            e = key[s]
            if e:
                t *= val**e
        total += t
    return total


@dataclass
class DirectionalCharts:
    """Rotated normal form plus its two directional chart fields."""

    result: NormalFormResult
    kappa: KappaResult
    rotated: list[Poly]
    kappa_rotated: Poly
    chart1: list[Poly]
    chart2: list[Poly]
    nf_map: NFChartMap

    @property
    def ring(self) -> Ring:
        return self.result.ring


def _chart1_field(rotated: list[Poly], ring: Ring) -> list[Poly]:
    u, v = ring.var(Z1), ring.var(Z2)
    sub = {Z1: u, Z2: u.mul(v)}
    g = _subs_exact(rotated, sub)
    out = [g[i].divexact_var(Z1, 1) for i in range(NSTATE)]
    out[1] = (g[1] - v.mul(g[0])).divexact_var(Z1, 2)
    return out


def _chart2_field(rotated: list[Poly], ring: Ring) -> list[Poly]:
    u, v = ring.var(Z1), ring.var(Z2)
    sub = {Z1: u.mul(v), Z2: v}
    g = _subs_exact(rotated, sub)
    out = [g[i].divexact_var(Z2, 1) for i in range(NSTATE)]
    out[0] = (g[0] - u.mul(g[1])).divexact_var(Z2, 2)
    return out


def _h_correction(chart1_e: Poly, ring: Ring) -> Poly:
    """Constant c with d/dtau (c u^8 vhat) cancelling the u^8 vhat drift.

    The chart e-component is (prefactor) * u^8 * rho(vhat) with rho odd;
    matching the vhat^1 order of 8(1+v^2) g - 3v(1+v^2/3) g' = -rho for
    g = c vhat gives 5c = -rho_1.
    """
    rho1 = chart1_e.filter_terms(
        lambda k: k[Z1] == 8 and k[Z2] == 1 and not any(
            k[s] for s in (2, 3, 4, 5))
    )
    if rho1.is_zero():
        return ring.zero()
    const = rho1.divexact_var(Z1, 8).divexact_var(Z2, 1)
    return const.scale(Fraction(-1, 5))


def _invert_v_series(v_poly: Poly, ring: Ring, degree: int) -> Poly:
    """Series reversion: vhat as a polynomial in (u, v, e1, e2).

    With v = vhat + vhat^3/3 + G(u, vhat, e) (G collecting the u^4 energy
    corrections), iterate vhat <- v - vhat^3/3 - G(u, vhat); each sweep
    gains at least two formal degrees, so the series stabilises.
    """
    v = ring.var(Z2)
    correction = v_poly - v - v.pow(3).scale(Fraction(1, 3))
    series = v
    for _ in range(degree):
        inner = correction.subs({Z2: series}, degree)
        cubed = series.pow(3, degree).scale(Fraction(1, 3))
        nxt = (v - cubed - inner).trunc(degree)
        if nxt == series:
            return series
        series = nxt
    raise RuntimeError("chart inversion did not stabilise")


def build_directional(
    result: NormalFormResult, kappa: KappaResult | None = None
) -> DirectionalCharts:
    """Assemble the rotated field, both chart fields and the chart map."""
    if kappa is None:
        kappa = kappa_integral(result)
    ring = result.ring
    rotated = rotate_pi4(result.normal_form)
    kappa_rotated = rotate_scalar_pi4(kappa.kappa)
    chart1 = _chart1_field(rotated, ring)
    chart2 = _chart2_field(rotated, ring)

    u, v = ring.var(Z1), ring.var(Z2)
    v_poly = kappa_rotated.subs({Z1: u, Z2: u.mul(v)}).divexact_var(Z1, 3)
    h1_corr = _h_correction(chart1[3], ring)
    h2_corr = _h_correction(chart1[4], ring)
    inverse_degree = 8
    vhat_series = _invert_v_series(v_poly, ring, inverse_degree)
    nf_map = NFChartMap(
        v_poly=v_poly,
        vhat_series=vhat_series,
        h1_corr=h1_corr,
        h2_corr=h2_corr,
        inverse_degree=inverse_degree,
    )
    return DirectionalCharts(
        result=result,
        kappa=kappa,
        rotated=rotated,
        kappa_rotated=kappa_rotated,
        chart1=chart1,
        chart2=chart2,
        nf_map=nf_map,
    )
