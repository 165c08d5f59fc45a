"""Shared fixtures; the expensive engine runs and sweeps are session-scoped."""

from __future__ import annotations

import time

import numpy as np
import pytest

from sbcblock.blockmap import c0_continuity_check, sweep_and_fit
from sbcblock.masses import derive_constants
from sbcblock.normalform import kappa_integral, normal_form_for_masses

EQUAL = (1.0, 1.0, 1.0, 1.0)
MASSES_A = (1.0, 2.0, 3.0, 4.0)
MASSES_B = (2.0, 1.0, 1.0, 3.0)


def default_offsets(delta: float, n: int = 12) -> tuple[float, ...]:
    return tuple(float(v) * delta**3 for v in np.geomspace(1e-3, 3e-2, n))


@pytest.fixture(scope="session")
def constants_eq():
    return derive_constants(EQUAL)


@pytest.fixture(scope="session")
def nf_timing():
    """Engine wall time, shared with the acceptance runtime criterion."""
    t0 = time.perf_counter()
    res = normal_form_for_masses(EQUAL)
    elapsed = time.perf_counter() - t0
    return res, elapsed


@pytest.fixture(scope="session")
def nf_result_eq(nf_timing):
    return nf_timing[0]


@pytest.fixture(scope="session")
def kappa_eq(nf_result_eq):
    return kappa_integral(nf_result_eq)


@pytest.fixture(scope="session")
def sweep_timing():
    """Default equal-mass sweep and its wall time."""
    t0 = time.perf_counter()
    sweep = sweep_and_fit(default_offsets(0.2), delta=0.2)
    elapsed = time.perf_counter() - t0
    return sweep, elapsed


@pytest.fixture(scope="session")
def sweep_eq(sweep_timing):
    return sweep_timing[0]


@pytest.fixture(scope="session")
def sweep_eq_d01():
    return sweep_and_fit(default_offsets(0.1), delta=0.1)


@pytest.fixture(scope="session")
def sweep_masses_a():
    return sweep_and_fit(default_offsets(0.2), delta=0.2, masses=MASSES_A)


@pytest.fixture(scope="session")
def sweep_masses_b():
    return sweep_and_fit(default_offsets(0.2), delta=0.2, masses=MASSES_B)


@pytest.fixture(scope="session")
def c0_report():
    return c0_continuity_check(delta=0.2, n_halvings=8)
