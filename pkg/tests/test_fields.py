"""Vector fields: Jacobians, invariants, and the collision manifold."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sbcblock.fields import (
    collision_manifold_rhs,
    energy_glc,
    energy_polar,
    energy_uncoupled,
    polar_equilibria,
    vf_glc,
    vf_glc_jac,
    vf_polar,
    vf_polar_jac,
    vf_uncoupled,
    vf_uncoupled_jac,
)
from sbcblock.integrate import IntegratorConfig, integrate
from sbcblock.masses import derive_constants


@pytest.fixture(scope="module")
def c_eq():
    return derive_constants((1, 1, 1, 1))


@pytest.fixture(scope="module")
def c_unequal():
    return derive_constants((1, 2, 3, 4))


def _fd_jacobian(rhs, state, c, h=1e-7):
    n = len(state)
    jac = np.zeros((n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        jac[:, j] = (rhs(state + step, c) - rhs(state - step, c)) / (2 * h)
    return jac


def _random_states(rng, n):
    states = []
    for _ in range(n):
        states.append(
            np.array(
                [
                    rng.uniform(0.05, 0.3),
                    rng.uniform(0.05, 0.3),
                    rng.uniform(1.1, 1.8),
                    rng.uniform(-0.2, -0.02),
                    rng.uniform(-0.2, -0.02),
                    rng.uniform(-0.05, 0.05),
                ]
            )
        )
    return states


@pytest.mark.parametrize("field,jac", [(vf_glc, vf_glc_jac), (vf_uncoupled, vf_uncoupled_jac)])
@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (1, 2, 3, 4)])
def test_jacobians_match_finite_differences(field, jac, masses):
    c = derive_constants(masses)
    rng = np.random.default_rng(3)
    for state in _random_states(rng, 5):
        analytic = jac(state, c)
        numeric = _fd_jacobian(field, state, c)
        assert np.max(np.abs(analytic - numeric)) < 5e-6


@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (1, 2, 3, 4)])
def test_polar_jacobian_matches_finite_differences(masses):
    c = derive_constants(masses)
    rng = np.random.default_rng(4)
    for _ in range(5):
        state = np.array(
            [
                rng.uniform(0.05, 0.3),
                rng.uniform(0.2, 1.2),
                rng.uniform(1.1, 1.8),
                rng.uniform(-0.2, -0.02),
                rng.uniform(-0.2, -0.02),
                rng.uniform(-0.05, 0.05),
            ]
        )
        analytic = vf_polar_jac(state, c)
        numeric = _fd_jacobian(vf_polar, state, c)
        assert np.max(np.abs(analytic - numeric)) < 5e-6


def test_uncoupled_field_freezes_energies(c_eq):
    rng = np.random.default_rng(5)
    for state in _random_states(rng, 5):
        rhs = vf_uncoupled(state, c_eq)
        assert rhs[3] == 0.0
        assert rhs[4] == 0.0
        assert rhs[5] == 0.0
        # The binary equations of the two fields share their leading part.
        coupled = vf_glc(state, c_eq)
        assert rhs[0] == pytest.approx(coupled[0], rel=1e-12)
        assert rhs[2] == pytest.approx(coupled[2], rel=1e-12)


@pytest.mark.parametrize("masses", [(1, 1, 1, 1), (2, 1, 1, 3)])
def test_energy_is_conserved_along_the_flow(masses):
    c = derive_constants(masses)
    state0 = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])
    e0 = energy_glc(state0, c)
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12)
    traj, _ = integrate(lambda y: vf_glc(y, c), state0, (0.0, 2.0), cfg)
    drift = abs(energy_glc(traj.end, c) - e0)
    assert drift < 1e-10


def test_uncoupled_energy_is_conserved(c_eq):
    state0 = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])
    e0 = energy_uncoupled(state0, c_eq)
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12)
    traj, _ = integrate(lambda y: vf_uncoupled(y, c_eq), state0, (0.0, 2.0), cfg)
    assert abs(energy_uncoupled(traj.end, c_eq) - e0) < 1e-10


def test_polar_energy_matches_glc(c_eq):
    from sbcblock.charts import Chart, ChartState, chart_transform

    state = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])
    pol = chart_transform(ChartState(Chart.GLC, state), Chart.POLAR, c_eq)
    assert energy_polar(pol.coords, c_eq) == pytest.approx(energy_glc(state, c_eq), rel=1e-12)


def test_polar_equilibria_locations():
    th1, th2 = polar_equilibria()
    assert th1 == pytest.approx(math.pi / 4, abs=1e-15)
    assert th2 == pytest.approx(-3 * math.pi / 4, abs=1e-15)
    assert abs(collision_manifold_rhs(th1)) < 1e-14
    assert abs(collision_manifold_rhs(th2)) < 1e-14


@pytest.mark.parametrize(
    "theta,expected",
    [
        (math.pi / 4, (-3 / math.sqrt(2), 1 / math.sqrt(2))),
        (-3 * math.pi / 4, (-1 / math.sqrt(2), 3 / math.sqrt(2))),
    ],
)
def test_polar_equilibrium_eigenvalues(theta, expected, c_eq):
    state = np.array([0.0, theta, 1.0, -0.1, -0.1, 0.0])
    assert np.max(np.abs(vf_polar(state, c_eq))) < 1e-14
    jac = vf_polar_jac(state, c_eq)
    eigs = np.sort(np.linalg.eigvals(jac).real)
    nonzero = [e for e in eigs if abs(e) > 1e-12]
    assert len(nonzero) == 2
    assert nonzero[0] == pytest.approx(expected[0], abs=1e-12)
    assert nonzero[1] == pytest.approx(expected[1], abs=1e-12)
    imag = np.max(np.abs(np.linalg.eigvals(jac).imag))
    assert imag < 1e-12


def test_heteroclinic_orbit_stays_on_the_collision_manifold(c_eq):
    # On the r = 0 slice the angle runs from one equilibrium to the
    # other while the radius stays exactly zero.
    th_start = -3 * math.pi / 4 + 0.1
    state0 = np.array([0.0, th_start, 1.0, -0.1, -0.1, 0.0])
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)
    traj, _ = integrate(lambda y: vf_polar(y, c_eq), state0, (0.0, 40.0), cfg)
    samples = traj.dense(np.linspace(0.0, traj.t_end, 50))
    assert np.max(np.abs(samples[0])) == 0.0
    assert traj.end[1] == pytest.approx(math.pi / 4, abs=1e-6)
    # Monotone approach; tiny integrator wiggle is allowed once the
    # angle has saturated at the equilibrium.
    thetas = samples[1]
    assert np.all(np.diff(thetas) > -1e-8)
