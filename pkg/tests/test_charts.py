"""Coordinate charts: round trips, clocks, and domain errors."""

from __future__ import annotations

import numpy as np
import pytest

from sbcblock.charts import (
    CLOCK_DESCRIPTORS,
    Chart,
    ChartError,
    ChartState,
    NormalFormFrame,
    chart_transform,
    clock_rate,
)
from sbcblock.directional import build_directional
from sbcblock.masses import derive_constants
from sbcblock.normalform import kappa_integral, normal_form_for_masses


@pytest.fixture(scope="module")
def c_eq():
    return derive_constants((1, 1, 1, 1))


@pytest.fixture(scope="module")
def bundle_eq():
    result = normal_form_for_masses((1, 1, 1, 1))
    return build_directional(result, kappa_integral(result))


@pytest.fixture(scope="module")
def frame_eq(bundle_eq):
    return NormalFormFrame(bundle_eq, h1_star=-0.1, h2_star=-0.1)


STATE = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])


def test_every_chart_has_a_clock_descriptor():
    assert set(CLOCK_DESCRIPTORS) == set(Chart)


@pytest.mark.parametrize(
    "target",
    [Chart.PHYSICAL, Chart.LEVI_CIVITA, Chart.ROTATED, Chart.POLAR],
)
def test_positive_sheet_round_trips(target, c_eq):
    start = ChartState(Chart.GLC, STATE.copy())
    there = chart_transform(start, target, c_eq)
    assert there.chart is target
    back = chart_transform(there, Chart.GLC, c_eq)
    assert np.max(np.abs(back.coords - STATE)) < 1e-12


def test_directional_round_trips(c_eq, bundle_eq):
    start = ChartState(Chart.GLC, STATE.copy())
    for target in (Chart.DIR_Z1, Chart.DIR_Z2):
        there = chart_transform(start, target, c_eq, frame=bundle_eq)
        back = chart_transform(there, Chart.GLC, c_eq, frame=bundle_eq)
        assert np.max(np.abs(back.coords - STATE)) < 1e-12


def test_normal_form_round_trip(c_eq, frame_eq):
    start = ChartState(Chart.GLC, STATE.copy())
    nf = chart_transform(start, Chart.NORMAL_FORM, c_eq, frame=frame_eq)
    back = chart_transform(nf, Chart.GLC, c_eq, frame=frame_eq)
    assert np.max(np.abs(back.coords - STATE)) < 1e-12
    # The deviations from the reference energies shrink by the order of
    # the normal-form correction.
    assert abs(nf.coords[3]) < 1e-3
    assert abs(nf.coords[4]) < 1e-3


def test_normal_form_matches_pipeline_measurement(c_eq, frame_eq):
    from sbcblock.blockmap import _get_pipeline

    pipe = _get_pipeline((1.0, 1.0, 1.0, 1.0), (-0.1, -0.1), 0.0, 9)
    meas = pipe.nf_measure(STATE)
    nf = chart_transform(ChartState(Chart.GLC, STATE.copy()), Chart.NORMAL_FORM, c_eq, frame=frame_eq)
    assert nf.coords[0] == pytest.approx(meas.u, abs=1e-13)
    assert nf.coords[1] == pytest.approx(meas.v, abs=1e-13)
    assert nf.coords[3] == pytest.approx(meas.e1, abs=1e-13)
    assert nf.coords[4] == pytest.approx(meas.e2, abs=1e-13)
    assert nf.coords[5] == pytest.approx(meas.w, abs=1e-13)


def test_clock_rates(c_eq, bundle_eq, frame_eq):
    glc = ChartState(Chart.GLC, STATE.copy())
    assert clock_rate(glc, c_eq) == 1.0
    phys = chart_transform(glc, Chart.PHYSICAL, c_eq)
    assert clock_rate(phys, c_eq) == pytest.approx(STATE[0] ** 2 * STATE[1] ** 2, rel=1e-12)
    pol = chart_transform(glc, Chart.POLAR, c_eq)
    assert clock_rate(pol, c_eq) == pytest.approx(np.hypot(STATE[0], STATE[1]), rel=1e-12)
    d1 = chart_transform(glc, Chart.DIR_Z1, c_eq, frame=bundle_eq)
    assert clock_rate(d1, c_eq, frame=bundle_eq) == pytest.approx(0.5 * (STATE[0] + STATE[1]), rel=1e-12)
    d2 = chart_transform(glc, Chart.DIR_Z2, c_eq, frame=bundle_eq)
    assert clock_rate(d2, c_eq, frame=bundle_eq) == pytest.approx(0.5 * (STATE[0] - STATE[1]), rel=1e-12)
    nf = chart_transform(glc, Chart.NORMAL_FORM, c_eq, frame=frame_eq)
    assert clock_rate(nf, c_eq, frame=frame_eq) == nf.coords[0]


def test_polar_layout(c_eq):
    pol = chart_transform(ChartState(Chart.GLC, STATE.copy()), Chart.POLAR, c_eq)
    assert pol.coords[0] == pytest.approx(np.hypot(STATE[0], STATE[1]), rel=1e-14)
    assert pol.coords[1] == pytest.approx(np.arctan2(STATE[1], STATE[0]), rel=1e-14)
    assert np.allclose(pol.coords[2:], STATE[2:], rtol=1e-14)


def test_physical_chart_squares_the_separations(c_eq):
    phys = chart_transform(ChartState(Chart.GLC, STATE.copy()), Chart.PHYSICAL, c_eq)
    assert phys.coords[0] == pytest.approx(STATE[0] ** 2, rel=1e-14)
    assert phys.coords[1] == pytest.approx(STATE[1] ** 2, rel=1e-14)
    assert phys.coords[2] == STATE[2]


def test_double_cover_returns_the_positive_sheet(c_eq):
    # Both z sheets project to the same physical state; pulling back
    # lands on the positive sheet.
    neg = ChartState(Chart.GLC, np.array([-0.2, 0.15, 1.4, -0.1, -0.1, 0.02]))
    phys = chart_transform(neg, Chart.PHYSICAL, c_eq)
    back = chart_transform(phys, Chart.GLC, c_eq)
    mirror = np.array([0.2, 0.15, 1.4, -0.1, -0.1, 0.02])
    assert np.max(np.abs(back.coords - mirror)) < 1e-12


def test_identity_transform_is_a_no_op(c_eq):
    start = ChartState(Chart.GLC, STATE.copy())
    same = chart_transform(start, Chart.GLC, c_eq)
    assert np.all(same.coords == STATE)


def test_chart_errors(c_eq):
    bad = ChartState(Chart.PHYSICAL, np.array([-0.04, 0.0225, 1.4, -1.0, 1.0, 0.02]))
    with pytest.raises(ChartError):
        chart_transform(bad, Chart.GLC, c_eq)
    with pytest.raises(ChartError):
        chart_transform(ChartState(Chart.GLC, STATE.copy()), Chart.NORMAL_FORM, c_eq)
