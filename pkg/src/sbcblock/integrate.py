"""Time stepping for the regularised fields.

Thin layer over ``scipy.integrate.solve_ivp`` (DOP853, dense output)
with Poincare-section location, escape guards, and an optional
arbitrary-precision fallback through ``mpmath.odefun`` for passages
whose signal would drown in double-precision drift.

The clock is always the one of the chart the right-hand side is written
in; physical time can be carried along as a seventh component via
:func:`with_physical_clock`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits for a run.

    ``extended`` switches to the mpmath Taylor integrator with ``mp_dps``
    working digits; the scipy path ignores those fields.
    """

    rel_tol: float = 1e-13
    abs_tol: float = 1e-13
    max_step: float = math.inf
    first_step: float | None = None
    extended: bool = False
    mp_dps: int = 40
    mp_step: float = 0.25


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    nfev: int
    status: int
    message: str
    dense: Callable[[float], np.ndarray] | None = None

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class Section:
    """Zero level set g(state) = 0 crossed with a given orientation."""

    g: Callable[[np.ndarray], float]
    direction: float = 1.0
    name: str = "section"
    grazing_tol: float = 1e-8


@dataclass
class SectionHit:
    t: float
    state: np.ndarray
    residual: float
    transversality: float
    grazing: bool


class SectionNotReached(RuntimeError):
    """The flow ran into a guard or the time limit before the section."""

    def __init__(self, reason: str, trajectory: Trajectory | None = None):
        super().__init__(reason)
        self.reason = reason
        self.trajectory = trajectory


def _wrap_event(sec: Section, terminal: bool):
    def ev(t, y):
        return sec.g(y)

    ev.terminal = terminal
    ev.direction = sec.direction
    return ev


def integrate(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0: Sequence[float],
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
    events=(),
    t_eval=None,
):
    """Drive `rhs` (autonomous, state-only signature) over `t_span`.

    Returns the scipy result object wrapped in a :class:`Trajectory`
    (second return value is the raw scipy solution for event access).
    """
    cfg = cfg or IntegratorConfig()
    sol = solve_ivp(
        lambda t, y: rhs(y),
        t_span,
        np.asarray(y0, dtype=float),
        method="DOP853",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        first_step=cfg.first_step,
        dense_output=True,
        events=list(events) or None,
        t_eval=t_eval,
    )
    traj = Trajectory(
        t=sol.t,
        states=sol.y.T,
        nfev=sol.nfev,
        status=sol.status,
        message=sol.message,
        dense=sol.sol,
    )
    return traj, sol


def integrate_to_section(
    rhs,
    y0,
    section: Section,
    t_max: float,
    cfg: IntegratorConfig | None = None,
    guards: Sequence[Section] = (),
) -> tuple[SectionHit, Trajectory]:
    """Flow from `y0` until `section` is crossed in its direction.

    Guards are terminal level sets whose crossing aborts the run with
    :class:`SectionNotReached` (reason ``guard:<name>``); running out of
    time raises with reason ``t_max``.  The returned hit carries the
    polished event state, the level residual there, and a grazing flag
    when the crossing is close to tangential.
    """
    if cfg is not None and cfg.extended:
        raise ValueError(
            "extended-precision runs go through integrate_to_section_mp"
        )
    events = [_wrap_event(section, True)]
    events += [_wrap_event(g, True) for g in guards]
    traj, sol = integrate(rhs, y0, (0.0, t_max), cfg, events=events)

    if sol.t_events is None or len(sol.t_events[0]) == 0:
        for i, g in enumerate(guards):
            if len(sol.t_events[1 + i]) > 0:
                raise SectionNotReached(f"guard:{g.name}", traj)
        raise SectionNotReached("t_max", traj)

    t_hit = float(sol.t_events[0][0])
    state = np.asarray(sol.y_events[0][0], dtype=float)
    residual = abs(section.g(state))
    f = np.asarray(rhs(state), dtype=float)
    eps = 1e-7
    trans = (section.g(state + eps * f) - section.g(state - eps * f)) / (2 * eps)
    fscale = max(1.0, float(np.max(np.abs(f))))
    hit = SectionHit(
        t=t_hit,
        state=state,
        residual=residual,
        transversality=float(trans),
        grazing=abs(trans) < section.grazing_tol * fscale,
    )
    return hit, traj


def with_physical_clock(rhs):
    """Augment a GLC-clock right-hand side with t_phys' = z1^2 z2^2."""

    def rhs7(y):
        out = np.empty(7)
        out[:6] = rhs(y[:6])
        out[6] = (y[0] * y[0]) * (y[1] * y[1])
        return out

    return rhs7


# -- extended precision --------------------------------------------------------


@dataclass
class MpSectionHit:
    """Section hit from the arbitrary-precision path (states stay mpf)."""

    t: object
    state: list
    residual: float


def integrate_to_section_mp(
    rhs_mp,
    y0,
    g,
    t_max: float,
    cfg: IntegratorConfig,
) -> MpSectionHit:
    """mpmath Taylor-series analogue of :func:`integrate_to_section`.

    `rhs_mp` takes and returns mpf sequences; `g` is the section level
    evaluated on such a sequence (crossing direction: increasing).  The
    crossing is bracketed by fixed scan steps and polished with a
    bisection/secant hybrid entirely in working precision.
    """
    import mpmath as mp

    with mp.workdps(cfg.mp_dps):
        y0_mp = [mp.mpf(repr(float(v))) for v in y0]
        fun = mp.odefun(lambda t, y: rhs_mp(y), mp.mpf(0), y0_mp,
                        tol=mp.mpf(10) ** (-cfg.mp_dps + 4))
        step = mp.mpf(repr(cfg.mp_step))
        t_lo = mp.mpf(0)
        g_lo = g(y0_mp)
        t_hi = t_lo
        found = False
        while t_hi < t_max:
            t_hi = min(t_lo + step, mp.mpf(repr(float(t_max))))
            g_hi = g(fun(t_hi))
            if g_lo < 0 and g_hi >= 0:
                found = True
                break
            t_lo, g_lo = t_hi, g_hi
        if not found:
            raise SectionNotReached("t_max")

        # bisection to full working precision (robust; cost is modest
        # because odefun caches its Taylor steps)
        for _ in range(cfg.mp_dps * 4):
            t_mid = (t_lo + t_hi) / 2
            if t_mid == t_lo or t_mid == t_hi:
                break
            if g(fun(t_mid)) < 0:
                t_lo = t_mid
            else:
                t_hi = t_mid
        state = fun(t_hi)
        return MpSectionHit(t=t_hi, state=list(state), residual=abs(float(g(state))))


# -- convergence-order study ---------------------------------------------------


@dataclass
class OrderStudy:
    step_sizes: list
    errors: list
    observed_order: float
    expected_order: int = 8


def convergence_order_study(
    zeta0: float = 0.4,
    t_end: float = 2.0,
    step_sizes: Sequence[float] = (0.2, 0.141, 0.1, 0.0707, 0.05),
) -> OrderStudy:
    """Fixed-step order measurement on a closed-form orbit.

    With the interaction off and both binaries parabolic (h_i = 0) the
    diagonal z1 = z2 = zeta obeys zeta' = zeta^2, solved by
    zeta(tau) = zeta0 / (1 - zeta0 tau).  Forcing the step size with
    max_step = first_step = h and tolerances wide open turns DOP853 into
    a fixed-step scheme, whose global error must scale like h^8.
    """
    errors = []
    exact = zeta0 / (1.0 - zeta0 * t_end)
    for h in step_sizes:
        sol = solve_ivp(
            lambda t, y: np.array([y[0] * y[0]]),
            (0.0, t_end),
            [zeta0],
            method="DOP853",
            rtol=1e6,
            atol=1e6,
            max_step=h,
            first_step=h,
        )
        errors.append(abs(float(sol.y[0, -1]) - exact))
    logs_h = np.log(np.asarray(step_sizes))
    logs_e = np.log(np.maximum(np.asarray(errors), 1e-300))
    slope = float(np.polyfit(logs_h, logs_e, 1)[0])
    return OrderStudy(list(step_sizes), errors, slope)
