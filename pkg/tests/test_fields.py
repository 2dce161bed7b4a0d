"""Reconstruction of the flow-force field and its validation audits.

The laminar column has a closed-form quadratic flow force, which pins
the whole pipeline to machine precision; wave cases are checked against
trace conditions, refinement orders, and gauge invariance.
"""

import math

import numpy as np
import pytest

from flowforce import (
    InadmissibleIterate,
    PeriodicFunction,
    PhysicalParams,
    TrialState,
    conformal_map,
    derivative,
    grid_nodes,
    hilbert_strip,
    laminar_flow_force,
    onset_speed_sq,
    physical_constants,
    reconstruct,
    surface_curve,
    trace_branch,
    validate_solution,
)


@pytest.fixture(scope="module")
def wave_point(water):
    return trace_branch(1e-3, 1, water, n_modes=32).points[0]


@pytest.fixture(scope="module")
def wave_field(water, wave_point):
    return reconstruct(wave_point, water)


def _laminar_state(p, n_modes=8):
    lam = onset_speed_sq(1, p.k, p)
    return TrialState(lam, 0.0, PeriodicFunction.zero(n_modes))


def test_laminar_field_matches_closed_form(water):
    state = _laminar_state(water)
    field = reconstruct(state, water, n_y=64, n_x=128)
    expect = laminar_flow_force(field.v.values, state.speed_sq, water)
    assert np.max(np.abs(field.flow_force.values - expect)) < 1e-10
    s0, _ = physical_constants(state.speed_sq, 0.0, water)
    assert field.surface_value == pytest.approx(s0, rel=1e-15)


def test_laminar_surface_value_and_slope(water):
    lam = onset_speed_sq(1, water.k, water)
    s0, _ = physical_constants(lam, 0.0, water)
    h = water.h
    assert laminar_flow_force(h, lam, water) == pytest.approx(s0, rel=1e-14)
    assert laminar_flow_force(0.0, lam, water) == 0.0
    # central difference is exact for a quadratic
    step = 1e-4
    slope = (
        laminar_flow_force(h + step, lam, water)
        - laminar_flow_force(h - step, lam, water)
    ) / (2.0 * step)
    assert slope == pytest.approx(lam, rel=1e-9)


def test_wave_traces(water, wave_point, wave_field):
    s0, _ = physical_constants(
        wave_point.speed_sq, wave_point.bernoulli_shift, water
    )
    scale = max(1.0, abs(s0))
    assert wave_field.surface_value == pytest.approx(s0, rel=1e-15)
    top = wave_field.flow_force.top_row
    assert np.max(np.abs(top - s0)) < 1e-10 * scale
    assert np.max(np.abs(wave_field.flow_force.bottom_row)) < 1e-10 * scale
    assert np.max(np.abs(wave_field.harmonic_potential.bottom_row)) < 1e-12


def test_conformal_map_boundary_rows(water, wave_point):
    w = wave_point.elevation
    u, v = conformal_map(w, water, n_y=16, shift=0.3)
    x = grid_nodes(u.n_x)
    surface = water.h + w.eval_at(x)
    assert np.max(np.abs(v.top_row - surface)) < 1e-12
    assert np.all(v.bottom_row == 0.0)
    conj = hilbert_strip(w, water.strip_depth).eval_at(x)
    expect_u = x / water.k + 0.3 + conj
    assert np.max(np.abs(u.top_row - expect_u)) < 1e-12
    assert u.depth == water.strip_depth
    assert v.n_y == 16


def test_surface_curve_inversion_round_trip(water, wave_point):
    curve = surface_curve(wave_point.elevation, water, shift=0.1)
    x = grid_nodes(96)
    targets = curve.abscissa(x)
    back = curve.invert(targets)
    assert back.shape == x.shape
    assert np.max(np.abs(back - x)) < 1e-11
    # strictly increasing abscissa over the period
    assert np.all(np.diff(targets) > 0.0)


def test_surface_curve_rejects_bed_contact(water):
    w = PeriodicFunction.harmonic(1, 0.15, n_modes=8, kind="cos")
    with pytest.raises(InadmissibleIterate):
        surface_curve(w, water)


def test_correction_strength_laminar_under_pressure():
    p = PhysicalParams(g=9.81, sigma=0.073, h=0.1, k=10.0, p_atm=101325.0)
    state = _laminar_state(p)
    field = reconstruct(state, p, n_y=8)
    x = grid_nodes(32)
    expect = -p.p_atm * p.h
    assert np.max(np.abs(field.correction.strength(x) - expect)) < 1e-9 * abs(
        expect
    )


def test_correction_strength_matches_surface_geometry(water, wave_point):
    p = water.replace(p_atm=101325.0)
    field = reconstruct(wave_point, p)
    w = wave_point.elevation
    curve = surface_curve(w, p)
    x = grid_nodes(128)
    eta_slope = derivative(w).eval_at(x) / curve.abscissa_slope(x)
    direct = (
        -p.p_atm * curve.height(x)
        - p.sigma / np.sqrt(1.0 + eta_slope**2)
        + p.sigma
    )
    got = field.correction.strength(x)
    scale = max(1.0, float(np.max(np.abs(direct))))
    assert np.max(np.abs(got - direct)) < 1e-10 * scale


def test_validate_wave_solution(water, wave_point, wave_field):
    report = validate_solution(wave_field, wave_point, water)
    assert report.passed, report.failures
    assert report.failures == ()
    assert 3.0 <= report.harmonic_ratio <= 5.0
    assert report.harmonic_order >= 1.0
    assert report.force_balance_order >= 1.0
    assert report.residual_sup < 1e-9
    assert report.gauge_defect < 1e-9
    assert report.admissibility.passed


def test_validate_laminar_solution(water):
    state = _laminar_state(water)
    field = reconstruct(state, water, n_y=16, n_x=64)
    report = validate_solution(field, state, water)
    assert report.passed, report.failures
    # the laminar defects sit below the audit floor on every grid
    assert math.isinf(report.harmonic_order)
    assert math.isinf(report.force_balance_order)


def test_field_gauge_invariance(water, wave_point, wave_field):
    gauged = reconstruct(wave_point, water.replace(p_atm=101325.0))
    scale = max(1.0, float(np.max(np.abs(wave_field.flow_force.values))))
    diff = np.max(
        np.abs(gauged.flow_force.values - wave_field.flow_force.values)
    )
    assert diff / scale < 1e-9


def test_shift_equivariance(water, wave_point, wave_field):
    shifted = reconstruct(wave_point, water, shift=0.3)
    assert np.max(
        np.abs(shifted.u.values - (wave_field.u.values + 0.3))
    ) < 1e-13
    assert np.array_equal(shifted.v.values, wave_field.v.values)
    assert np.max(
        np.abs(shifted.flow_force.values - wave_field.flow_force.values)
    ) < 1e-12


def test_tampered_profile_fails_validation(water, wave_point):
    coeffs = np.array(wave_point.elevation.cos_coeffs)
    coeffs[2] += 1e-3
    bad = TrialState(
        wave_point.speed_sq,
        wave_point.bernoulli_shift,
        PeriodicFunction.from_cosines(coeffs),
    )
    field = reconstruct(bad, water)
    report = validate_solution(field, bad, water)
    assert not report.passed
    assert "surface equation residual above tolerance" in report.failures


def test_validation_needs_vertical_resolution(water, wave_point):
    field = reconstruct(wave_point, water, n_y=4)
    with pytest.raises(ValueError):
        validate_solution(field, wave_point, water)
