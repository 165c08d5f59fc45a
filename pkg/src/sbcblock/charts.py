"""Coordinate atlas for the collinear four-body block.

Eight charts cover the passage through the simultaneous double collision:

``PHYSICAL``      (Q1, Q2, x, P1, P2, y)    binary separations Q_i > 0 with
                                            conjugate momenta, centre pair
                                            (x, y); physical time t.
``LEVI_CIVITA``   (zt1, zt2, x, u1, u2, y)  square-root variables per binary,
                                            zt_i^2 = 8 k_i M_i Q_i,
                                            u_i = zt_i P_i / (4 M_i k_i);
                                            physical time t.
``GLC``           (z1, z2, x, h1, h2, y)    z_i = a_i^(-1/3) zt_i and the
                                            rescaled binary energies
                                            h_i = (u_i^2 - 1) / z_i^2;
                                            clock dt = z1^2 z2^2 dtau.
``ROTATED``       (zt1~, zt2~, x, h1, h2, y) the pi/4 rotation
                                            ((z1+z2)/2, (z1-z2)/2);
                                            same clock as GLC.
``POLAR``         (r, theta, x, h1, h2, y)  z = r (cos, sin);
                                            clock dbar = r dtau.
``DIR_Z1``        (u^, v^, x, h1, h2, y)    first directional chart of the
                                            rotation, zt~ = (u^, u^ v^);
                                            clock dhat = u^ dtau.
``DIR_Z2``        (u-, v-, x, h1, h2, y)    second directional chart,
                                            zt~ = (u- v-, v-);
                                            clock dbar2 = v- dtau.
``NORMAL_FORM``   (u, v, x~, e1~, e2~, y~)  full normal-form conjugacy: the
                                            degree-9 transform is inverted
                                            numerically, the z-pair rotated
                                            and read in the first direction
                                            chart with its energy shift;
                                            e_i~ are normal-form energy
                                            deviations from the reference
                                            (h1*, h2*), x~ and y~ the
                                            normal-form centre pair; clock
                                            dhat = u dtau.

``chart_transform`` moves a state between any two charts by composing the
edges above.  Transforms touching ``NORMAL_FORM`` need the directional
chart bundle from :func:`sbcblock.directional.build_directional`; all
other edges are closed-form.

Clocks are metadata: the fields in :mod:`sbcblock.fields` are written per
chart, and ``clock_rate`` returns d(chart time)/d(tau) so trajectories can
be re-timed consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .directional import DirectionalCharts
from .masses import DerivedConstants
from .ratpoly import G1, G2, P1, P2


class Chart(Enum):
    PHYSICAL = "physical"
    LEVI_CIVITA = "levi_civita"
    GLC = "glc"
    ROTATED = "rotated"
    POLAR = "polar"
    DIR_Z1 = "dir_z1"
    DIR_Z2 = "dir_z2"
    NORMAL_FORM = "normal_form"


#: human-readable clock factor relative to the regularised time tau
CLOCK_DESCRIPTORS = {
    Chart.PHYSICAL: "dt = z1^2 z2^2 dtau",
    Chart.LEVI_CIVITA: "dt = z1^2 z2^2 dtau",
    Chart.GLC: "dtau (reference clock)",
    Chart.ROTATED: "dtau (reference clock)",
    Chart.POLAR: "dbar = r dtau",
    Chart.DIR_Z1: "dhat = u dtau (signed)",
    Chart.DIR_Z2: "dbar2 = v dtau (signed)",
    Chart.NORMAL_FORM: "dhat = u dtau (shared with dir_z1)",
}


@dataclass(frozen=True)
class ChartState:
    """A point labelled by the chart its six coordinates live in."""

    chart: Chart
    coords: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        if len(self.coords) != 6:
            raise ValueError("chart states have six coordinates")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


class ChartError(ValueError):
    pass


def _tup(vals) -> tuple[float, ...]:
    return tuple(float(v) for v in vals)


# -- closed-form edges ---------------------------------------------------------


def _physical_to_lc(s, c: DerivedConstants):
    q1, q2, x, p1, p2, y = s
    if q1 <= 0.0 or q2 <= 0.0:
        raise ChartError("physical chart needs positive binary separations")
    zt1 = math.sqrt(8.0 * c.k1 * c.M1 * q1)
    zt2 = math.sqrt(8.0 * c.k2 * c.M2 * q2)
    u1 = zt1 * p1 / (4.0 * c.M1 * c.k1)
    u2 = zt2 * p2 / (4.0 * c.M2 * c.k2)
    return (zt1, zt2, x, u1, u2, y)


def _lc_to_physical(s, c: DerivedConstants):
    zt1, zt2, x, u1, u2, y = s
    if zt1 == 0.0 or zt2 == 0.0:
        raise ChartError("collision states have no physical representative")
    q1 = zt1 * zt1 / (8.0 * c.k1 * c.M1)
    q2 = zt2 * zt2 / (8.0 * c.k2 * c.M2)
    p1 = 4.0 * c.M1 * c.k1 * u1 / zt1
    p2 = 4.0 * c.M2 * c.k2 * u2 / zt2
    return (q1, q2, x, p1, p2, y)


def _lc_to_glc(s, c: DerivedConstants):
    zt1, zt2, x, u1, u2, y = s
    z1 = zt1 / c.a1_cbrt
    z2 = zt2 / c.a2_cbrt
    if z1 == 0.0 or z2 == 0.0:
        raise ChartError("h_i = (u_i^2 - 1)/z_i^2 is undefined at collision")
    h1 = (u1 * u1 - 1.0) / (z1 * z1)
    h2 = (u2 * u2 - 1.0) / (z2 * z2)
    return (z1, z2, x, h1, h2, y)


def _glc_to_lc(s, c: DerivedConstants):
    z1, z2, x, h1, h2, y = s
    r1 = 1.0 + h1 * z1 * z1
    r2 = 1.0 + h2 * z2 * z2
    if r1 < 0.0 or r2 < 0.0:
        raise ChartError("state outside the positive square-root branch")
    # the atlas keeps the u_i > 0 sheet of the double cover
    return (z1 * c.a1_cbrt, z2 * c.a2_cbrt, x, math.sqrt(r1), math.sqrt(r2), y)


def _glc_to_rotated(s, c):
    z1, z2, x, h1, h2, y = s
    return ((z1 + z2) / 2.0, (z1 - z2) / 2.0, x, h1, h2, y)


def _rotated_to_glc(s, c):
    w1, w2, x, h1, h2, y = s
    return (w1 + w2, w1 - w2, x, h1, h2, y)


def _glc_to_polar(s, c):
    z1, z2, x, h1, h2, y = s
    return (math.hypot(z1, z2), math.atan2(z2, z1), x, h1, h2, y)


def _polar_to_glc(s, c):
    r, th, x, h1, h2, y = s
    return (r * math.cos(th), r * math.sin(th), x, h1, h2, y)


def _rotated_to_dir1(s, c):
    w1, w2, x, h1, h2, y = s
    if w1 == 0.0:
        raise ChartError("dir_z1 chart is singular on the axis zt1~ = 0")
    return (w1, w2 / w1, x, h1, h2, y)


def _dir1_to_rotated(s, c):
    u, v, x, h1, h2, y = s
    return (u, u * v, x, h1, h2, y)


def _rotated_to_dir2(s, c):
    w1, w2, x, h1, h2, y = s
    if w2 == 0.0:
        raise ChartError("dir_z2 chart is singular on the axis zt2~ = 0")
    return (w1 / w2, w2, x, h1, h2, y)


def _dir2_to_rotated(s, c):
    u, v, x, h1, h2, y = s
    return (u * v, v, x, h1, h2, y)


_EDGES = {
    (Chart.PHYSICAL, Chart.LEVI_CIVITA): _physical_to_lc,
    (Chart.LEVI_CIVITA, Chart.PHYSICAL): _lc_to_physical,
    (Chart.LEVI_CIVITA, Chart.GLC): _lc_to_glc,
    (Chart.GLC, Chart.LEVI_CIVITA): _glc_to_lc,
    (Chart.GLC, Chart.ROTATED): _glc_to_rotated,
    (Chart.ROTATED, Chart.GLC): _rotated_to_glc,
    (Chart.GLC, Chart.POLAR): _glc_to_polar,
    (Chart.POLAR, Chart.GLC): _polar_to_glc,
    (Chart.ROTATED, Chart.DIR_Z1): _rotated_to_dir1,
    (Chart.DIR_Z1, Chart.ROTATED): _dir1_to_rotated,
    (Chart.ROTATED, Chart.DIR_Z2): _rotated_to_dir2,
    (Chart.DIR_Z2, Chart.ROTATED): _dir2_to_rotated,
}

# hand-laid shortest routes through the edge graph
_ROUTES = {
    (Chart.PHYSICAL, Chart.GLC): (Chart.LEVI_CIVITA,),
    (Chart.GLC, Chart.PHYSICAL): (Chart.LEVI_CIVITA,),
    (Chart.PHYSICAL, Chart.ROTATED): (Chart.LEVI_CIVITA, Chart.GLC),
    (Chart.ROTATED, Chart.PHYSICAL): (Chart.GLC, Chart.LEVI_CIVITA),
    (Chart.PHYSICAL, Chart.POLAR): (Chart.LEVI_CIVITA, Chart.GLC),
    (Chart.POLAR, Chart.PHYSICAL): (Chart.GLC, Chart.LEVI_CIVITA),
    (Chart.PHYSICAL, Chart.DIR_Z1): (Chart.LEVI_CIVITA, Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z1, Chart.PHYSICAL): (Chart.ROTATED, Chart.GLC, Chart.LEVI_CIVITA),
    (Chart.PHYSICAL, Chart.DIR_Z2): (Chart.LEVI_CIVITA, Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z2, Chart.PHYSICAL): (Chart.ROTATED, Chart.GLC, Chart.LEVI_CIVITA),
    (Chart.LEVI_CIVITA, Chart.ROTATED): (Chart.GLC,),
    (Chart.ROTATED, Chart.LEVI_CIVITA): (Chart.GLC,),
    (Chart.LEVI_CIVITA, Chart.POLAR): (Chart.GLC,),
    (Chart.POLAR, Chart.LEVI_CIVITA): (Chart.GLC,),
    (Chart.LEVI_CIVITA, Chart.DIR_Z1): (Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z1, Chart.LEVI_CIVITA): (Chart.ROTATED, Chart.GLC),
    (Chart.LEVI_CIVITA, Chart.DIR_Z2): (Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z2, Chart.LEVI_CIVITA): (Chart.ROTATED, Chart.GLC),
    (Chart.GLC, Chart.DIR_Z1): (Chart.ROTATED,),
    (Chart.DIR_Z1, Chart.GLC): (Chart.ROTATED,),
    (Chart.GLC, Chart.DIR_Z2): (Chart.ROTATED,),
    (Chart.DIR_Z2, Chart.GLC): (Chart.ROTATED,),
    (Chart.POLAR, Chart.ROTATED): (Chart.GLC,),
    (Chart.ROTATED, Chart.POLAR): (Chart.GLC,),
    (Chart.POLAR, Chart.DIR_Z1): (Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z1, Chart.POLAR): (Chart.ROTATED, Chart.GLC),
    (Chart.POLAR, Chart.DIR_Z2): (Chart.GLC, Chart.ROTATED),
    (Chart.DIR_Z2, Chart.POLAR): (Chart.ROTATED, Chart.GLC),
    (Chart.DIR_Z1, Chart.DIR_Z2): (Chart.ROTATED,),
    (Chart.DIR_Z2, Chart.DIR_Z1): (Chart.ROTATED,),
}


@dataclass(frozen=True)
class NormalFormFrame:
    """The normal-form chart relative to reference energies (h1*, h2*).

    The polynomial change of variables treats the energies as deviations
    e_i = h_i - h_i*; a frame fixes that reference so the chart is a
    genuine coordinate system.  The frame owns float evaluators for the
    normalising transform psi and inverts it by fixed point, so the chart
    applies the full conjugacy (psi layer, pi/4 rotation, direction chart
    and its energy shift), not just the directional bookkeeping.
    """

    charts: DirectionalCharts
    h1_star: float = -0.1
    h2_star: float = -0.1

    @cached_property
    def _transform_num(self):
        c = self.charts.result.constants
        pv = {P1: self.h1_star, P2: self.h2_star,
              G1: c.a1_cbrt, G2: c.a2_cbrt}
        return [p.to_numeric(pv) for p in self.charts.result.transform]

    @property
    def _base_point(self) -> tuple[float, float]:
        base = self.charts.result.base
        return float(base.x_star), float(base.y_star)

    def transform_apply(self, w: np.ndarray) -> np.ndarray:
        """psi(w): original deviation variables from normal-form ones."""
        out = np.empty(6)
        for i, (exps, coeffs) in enumerate(self._transform_num):
            mono = np.prod(w[None, :] ** exps, axis=1)
            out[i] = float(mono @ coeffs)
        return out

    def transform_invert(self, dev: np.ndarray) -> np.ndarray:
        """w with psi(w) = dev, by fixed point on the nonlinear part."""
        w = np.asarray(dev, dtype=float).copy()
        scale = 1.0 + float(np.max(np.abs(w)))
        for _ in range(80):
            w_next = dev - (self.transform_apply(w) - w)
            if float(np.max(np.abs(w_next - w))) <= 1e-16 * scale:
                return w_next
            w = w_next
        raise ChartError(
            "normalising-transform inversion did not converge; the state "
            "is outside the tube where the transform is near-identity"
        )


def _as_frame(frame) -> NormalFormFrame:
    if frame is None:
        raise ChartError("normal-form transforms need a NormalFormFrame")
    if isinstance(frame, DirectionalCharts):
        return NormalFormFrame(frame)
    return frame


def _glc_to_nf(s, c, frame: NormalFormFrame):
    z1, z2, x, h1, h2, y = s
    x_star, y_star = frame._base_point
    dev = np.array([
        z1, z2, x - x_star,
        h1 - frame.h1_star, h2 - frame.h2_star, y - y_star,
    ])
    w = frame.transform_invert(dev)
    zt1, zt2 = 0.5 * (w[0] + w[1]), 0.5 * (w[0] - w[1])
    if zt1 == 0.0:
        raise ChartError("normal-form chart is singular on the axis zt1~ = 0")
    un, vn, h1n, h2n = frame.charts.nf_map.forward(
        zt1, zt2 / zt1,
        frame.h1_star + w[3], frame.h2_star + w[4],
        c, frame.h1_star, frame.h2_star,
    )
    return (un, vn, x_star + w[2],
            h1n - frame.h1_star, h2n - frame.h2_star, y_star + w[5])


def _nf_to_glc(s, c, frame: NormalFormFrame):
    un, vn, xn, e1, e2, yn = s
    x_star, y_star = frame._base_point
    u, v_hat, h1p, h2p = frame.charts.nf_map.backward(
        un, vn, e1 + frame.h1_star, e2 + frame.h2_star,
        c, frame.h1_star, frame.h2_star,
    )
    zt1, zt2 = u, u * v_hat
    w = np.array([
        zt1 + zt2, zt1 - zt2, xn - x_star,
        h1p - frame.h1_star, h2p - frame.h2_star, yn - y_star,
    ])
    dev = frame.transform_apply(w)
    return (dev[0], dev[1], x_star + dev[2],
            frame.h1_star + dev[3], frame.h2_star + dev[4], y_star + dev[5])


def chart_transform(
    state: ChartState,
    target: Chart,
    c: DerivedConstants,
    frame: NormalFormFrame | DirectionalCharts | None = None,
) -> ChartState:
    """Express `state` in the `target` chart.

    Parameters
    ----------
    state : ChartState
        Source point.
    target : Chart
        Destination chart.
    c : DerivedConstants
        Mass-derived constants of the system.
    frame : NormalFormFrame or DirectionalCharts, optional
        Required only when the source or target is ``NORMAL_FORM``.
        A bare chart bundle is wrapped in a frame with the default
        reference energies.

    Raises
    ------
    ChartError
        When the point sits outside the destination chart's domain
        (collision axes, negative separations, square-root branch).
    """
    if state.chart is target:
        return state

    src, dst = state.chart, target
    coords = state.coords

    # peel the normal-form leg off either end; the rest is closed form
    if src is Chart.NORMAL_FORM:
        coords = _nf_to_glc(coords, c, _as_frame(frame))
        src = Chart.GLC
    nf_tail = dst is Chart.NORMAL_FORM
    if nf_tail:
        dst = Chart.GLC

    if src is not dst:
        hops = _ROUTES.get((src, dst), ()) + (dst,)
        here = src
        for nxt in hops:
            coords = _EDGES[(here, nxt)](coords, c)
            here = nxt
    if nf_tail:
        coords = _glc_to_nf(coords, c, _as_frame(frame))
    return ChartState(target, _tup(coords))


def clock_rate(state: ChartState, c: DerivedConstants,
               frame: NormalFormFrame | DirectionalCharts | None = None) -> float:
    """d(chart time)/d(tau) at the state, tau being the GLC clock.

    Physical time runs at z1^2 z2^2, the polar clock at r, the
    directional clocks at the (signed) chart abscissa; the normal-form
    chart shares the first directional clock.
    """
    ch = state.chart
    if ch is Chart.NORMAL_FORM:
        # the conjugated field keeps the tau clock; its direction chart
        # divides by the normal-form abscissa
        return state.coords[0]
    glc = chart_transform(state, Chart.GLC, c, frame).coords
    z1, z2 = glc[0], glc[1]
    if ch in (Chart.PHYSICAL, Chart.LEVI_CIVITA):
        return z1 * z1 * z2 * z2
    if ch in (Chart.GLC, Chart.ROTATED):
        return 1.0
    if ch is Chart.POLAR:
        return math.hypot(z1, z2)
    if ch is Chart.DIR_Z1:
        return (z1 + z2) / 2.0
    if ch is Chart.DIR_Z2:
        return (z1 - z2) / 2.0
    raise ChartError(f"unknown chart {ch!r}")
