"""Adaptive integration, section hits, and the extended-precision path."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sbcblock.fields import vf_glc
from sbcblock.integrate import (
    IntegratorConfig,
    Section,
    SectionNotReached,
    convergence_order_study,
    integrate,
    integrate_to_section,
    integrate_to_section_mp,
    with_physical_clock,
)
from sbcblock.masses import derive_constants


def _oscillator(y):
    return np.array([y[1], -y[0]])


def test_convergence_order_matches_the_scheme():
    study = convergence_order_study()
    assert study.expected_order == 8
    assert study.observed_order == pytest.approx(8.0, abs=0.3)
    assert all(a > b for a, b in zip(study.errors, study.errors[1:]))


def test_tolerance_scaling_is_monotone():
    c = derive_constants((1, 1, 1, 1))
    y0 = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])
    ref, _ = integrate(
        lambda y: vf_glc(y, c), y0, (0.0, 2.0), IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)
    )
    errors = []
    for tol in (1e-5, 1e-7, 1e-9, 1e-11):
        traj, _ = integrate(
            lambda y: vf_glc(y, c), y0, (0.0, 2.0), IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2)
        )
        errors.append(np.max(np.abs(traj.end - ref.end)))
    assert all(a > b for a, b in zip(errors, errors[1:]))
    assert errors[0] / errors[-1] > 1e4


def test_dense_output_tracks_the_closed_form():
    traj, _ = integrate(_oscillator, [1.0, 0.0], (0.0, 6.0), IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12))
    ts = np.linspace(0.0, 6.0, 40)
    samples = traj.dense(ts)
    assert np.max(np.abs(samples[0] - np.cos(ts))) < 1e-10
    assert np.max(np.abs(samples[1] + np.sin(ts))) < 1e-10
    assert np.allclose(traj.dense(np.array([traj.t_end]))[:, 0], traj.end, rtol=1e-12)


def test_exponential_section_hit_matches_log():
    hit, traj = integrate_to_section(
        lambda y: y, [1.0], Section(lambda y: y[0] - 2.0), 5.0, IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)
    )
    assert hit.t == pytest.approx(math.log(2.0), abs=1e-12)
    assert hit.state[0] == pytest.approx(2.0, rel=1e-12)
    assert traj.t_end == hit.t


def test_direction_filter_skips_the_wrong_way_crossing():
    # cos(t) crosses 0.5 downward at t = pi/3 and upward at t = 5 pi/3;
    # an upward section must take the second crossing.
    sec_up = Section(lambda y: y[0] - 0.5, direction=1.0)
    hit_up, _ = integrate_to_section(_oscillator, [1.0, 0.0], sec_up, 10.0, IntegratorConfig())
    assert hit_up.t == pytest.approx(5.0 * math.pi / 3.0, abs=1e-9)
    assert hit_up.transversality > 0.0
    sec_down = Section(lambda y: y[0] - 0.5, direction=-1.0)
    hit_down, _ = integrate_to_section(_oscillator, [1.0, 0.0], sec_down, 10.0, IntegratorConfig())
    assert hit_down.t == pytest.approx(math.pi / 3.0, abs=1e-9)
    assert not hit_up.grazing and not hit_down.grazing


def test_unreached_section_raises_with_reason():
    with pytest.raises(SectionNotReached, match="t_max"):
        integrate_to_section(
            _oscillator, [1.0, 0.0], Section(lambda y: y[0] - 2.0), 10.0, IntegratorConfig()
        )


def test_guard_section_aborts_first():
    guard = Section(lambda y: y[1] + 0.6, direction=-1.0, name="floor")
    with pytest.raises(SectionNotReached, match="floor"):
        integrate_to_section(
            _oscillator,
            [1.0, 0.0],
            Section(lambda y: y[0] + 2.0),
            50.0,
            IntegratorConfig(),
            guards=(guard,),
        )


def test_extended_config_is_rejected_by_the_double_path():
    cfg = IntegratorConfig(extended=True)
    with pytest.raises(ValueError):
        integrate_to_section(_oscillator, [1.0, 0.0], Section(lambda y: y[0] - 0.5), 10.0, cfg)


def test_section_hits_are_deterministic():
    sec = Section(lambda y: y[0] - 0.5, direction=1.0)
    hit_a, _ = integrate_to_section(_oscillator, [1.0, 0.0], sec, 10.0, IntegratorConfig())
    hit_b, _ = integrate_to_section(_oscillator, [1.0, 0.0], sec, 10.0, IntegratorConfig())
    assert hit_a.t == hit_b.t
    assert np.all(hit_a.state == hit_b.state)


def test_extended_precision_hit_matches_the_closed_form():
    # zeta' = zeta^2 from 0.4 reaches 0.8 at exactly tau = 1.25.
    cfg = IntegratorConfig(extended=True, mp_dps=30, mp_step=0.5)
    hit = integrate_to_section_mp(
        lambda y: [y[0] ** 2], [0.4], lambda y: float(y[0]) - 0.8, 5.0, cfg
    )
    assert float(hit.t) == pytest.approx(1.25, abs=1e-15)
    assert float(hit.state[0]) == pytest.approx(0.8, abs=1e-15)
    assert abs(hit.residual) < 1e-12


def test_physical_clock_augmentation():
    base = lambda y: np.zeros(6)
    wrapped = with_physical_clock(base)
    y = np.array([0.2, 0.3, 1.0, 0.0, 0.0, 0.0, 0.0])
    out = wrapped(y)
    assert out.shape == (7,)
    assert out[6] == pytest.approx(0.2**2 * 0.3**2, rel=1e-15)
    assert np.all(out[:6] == 0.0)
