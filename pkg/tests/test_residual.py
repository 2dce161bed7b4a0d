"""Surface-equation residual: trivial states, linearization, guards.

The linearization oracle is the closed-form diagonal symbol
m_n = -(1/k^2)(speed_sq k n coth(nkh) - sigma k^2 n^2 - g), derived by
hand from the equation before the residual assembly was written; the
frozen numbers below were evaluated from that formula independently.
"""

import math

import numpy as np
import pytest

from flowforce import (
    PeriodicFunction,
    PhysicalParams,
    SingularExpression,
    TrialState,
    check_admissibility,
    galerkin_residual,
    jacobian_fd,
    linearization_symbol,
    normal_coeff,
    onset_speed_sq,
    residual,
    tangent_coeff,
)
from flowforce.surface_equation import unknown_labels


def _random_params(rng):
    return PhysicalParams(
        g=float(rng.uniform(0.5, 20.0)),
        sigma=float(rng.uniform(0.0, 1.0)),
        h=float(rng.uniform(0.05, 2.0)),
        k=float(rng.uniform(0.5, 50.0)),
    )


def test_trivial_state_residual_is_minus_shift():
    rng = np.random.default_rng(42)
    w0 = PeriodicFunction.zero(16)
    for _ in range(20):
        p = _random_params(rng)
        lam = float(rng.uniform(0.1, 5.0))
        mu = float(rng.uniform(0.01, 1.0) * rng.choice([-1.0, 1.0]))
        r = residual(TrialState(lam, mu, w0), p)
        expect = -mu / p.k**2
        defect = r.cos_coeffs.copy()
        defect[0] -= expect
        assert np.max(np.abs(defect)) < 1e-12 * abs(expect)


def test_trivial_state_residual_under_pressure():
    """With a physical atmospheric pressure the identity survives up to
    the cancellation noise of p_atm-sized intermediates (gauge level)."""
    rng = np.random.default_rng(43)
    w0 = PeriodicFunction.zero(16)
    for _ in range(10):
        p = _random_params(rng).replace(p_atm=101325.0)
        lam = float(rng.uniform(0.1, 5.0))
        mu = float(rng.uniform(0.01, 1.0) * rng.choice([-1.0, 1.0]))
        r = residual(TrialState(lam, mu, w0), p)
        expect = -mu / p.k**2
        defect = r.cos_coeffs.copy()
        defect[0] -= expect
        assert np.max(np.abs(defect)) < 1e-9 * abs(expect)


def test_zero_shift_gives_zero_residual():
    p = PhysicalParams(g=9.81, sigma=0.073, h=0.1, k=10.0)
    r = residual(TrialState(1.3, 0.0, PeriodicFunction.zero(8)), p)
    assert r.sup_norm() == pytest.approx(0.0, abs=1e-15)


def test_linearization_symbol_frozen_value(water):
    assert linearization_symbol(1.5, 2, water) == pytest.approx(
        0.07890558378173561, rel=1e-13
    )


def test_linearization_symbol_vanishes_at_onset(water):
    lam = onset_speed_sq(1, water.k, water)
    assert abs(linearization_symbol(lam, 1, water)) < 1e-12


def test_jacobian_matches_diagonal_symbol(water):
    n = 8
    lam = 1.5
    state = TrialState(lam, 0.0, PeriodicFunction.zero(n))
    jac = jacobian_fd(state, water, n_modes=n)
    labels = unknown_labels(n)
    expect = np.zeros_like(jac)
    for col, label in enumerate(labels):
        if label == "bernoulli_shift":
            expect[0, col] = -1.0 / water.k**2
        elif label != "speed_sq":
            mode = int(label[1:])
            expect[mode, col] = linearization_symbol(lam, mode, water)
    scale = np.max(np.abs(expect))
    assert np.max(np.abs(jac - expect)) / scale < 1e-5


def test_jacobian_speed_column_at_onset(water):
    """Transversal direction: at (lambda, 0, s cos x) the derivative of
    the residual in speed_sq is -s coth(kh) cos x / k + O(s^2), from
    expanding B*dnv - metric*speed_sq by hand."""
    n = 4
    s = 1e-4
    w = PeriodicFunction.harmonic(1, s, n_modes=n, kind="cos")
    state = TrialState(onset_speed_sq(1, water.k, water), 0.0, w)
    jac = jacobian_fd(state, water, active=("speed_sq",), n_modes=n)
    kh = water.k * water.h
    expect = -s / math.tanh(kh) / water.k
    assert jac[1, 0] == pytest.approx(expect, rel=1e-3)


def test_normal_coeff_linear_part_is_gravity_slope(water):
    """FD oracle: at amplitude s the normal coefficient is
    speed_sq/k - (g/k) s cos x + O(s^2) when p_atm = 0."""
    s = 1e-6
    lam = 1.2
    w = PeriodicFunction.harmonic(1, s, n_modes=8, kind="cos")
    b = normal_coeff(w, lam, water)
    slope = (b - PeriodicFunction.constant(lam / water.k, 8)) * (1.0 / s)
    expect = -water.g / water.k
    assert slope.cos_coeffs[1] == pytest.approx(expect, rel=1e-4)
    assert abs(slope.cos_coeffs[0]) < 1e-3 * abs(expect)


def test_tangent_coeff_parity(water):
    w = PeriodicFunction.harmonic(1, 1e-3, n_modes=8, kind="cos")
    a = tangent_coeff(w, water)
    assert np.max(np.abs(a.cos_coeffs)) < 1e-14
    assert np.max(np.abs(a.sin_coeffs)) > 0.0


def test_normal_coeff_parity(water):
    w = PeriodicFunction.harmonic(1, 1e-3, n_modes=8, kind="cos")
    b = normal_coeff(w, 1.3, water)
    assert b.parity == "even" or np.max(np.abs(b.sin_coeffs)) < 1e-13


def test_residual_is_even_and_records_diagnostics(water):
    w = PeriodicFunction.harmonic(1, 1e-3, n_modes=16, kind="cos")
    diag = {}
    r = residual(TrialState(1.3, 0.0, w), water, diag=diag)
    assert r.parity == "even"
    assert diag["sine_energy_fraction"] < 1e-20
    assert diag["min_metric"] > 0.0
    assert diag["min_quotient_denominator"] > 0.0
    assert all(abs(v) < 1e-12 for v in diag["subtracted_means"].values())


def test_atmospheric_pressure_cancels(water):
    """Gauge property: the residual is independent of p_atm to rounding."""
    w = PeriodicFunction.harmonic(1, 1e-3, n_modes=16, kind="cos")
    lam = onset_speed_sq(1, water.k, water)
    mu = 0.1 * lam
    r0 = residual(TrialState(lam, mu, w), water)
    r1 = residual(TrialState(lam, mu, w), water.replace(p_atm=101325.0))
    scale = max(1.0, r0.sup_norm())
    assert np.max(np.abs(r0.cos_coeffs - r1.cos_coeffs)) / scale < 1e-9


def test_metric_floor_raises():
    p = PhysicalParams(g=9.81, sigma=0.0, h=1.0, k=1e6)
    with pytest.raises(SingularExpression):
        residual(TrialState(1.0, 0.0, PeriodicFunction.zero(4)), p)


def test_quotient_floor_raises(water):
    lam_tiny = 1e-7 * onset_speed_sq(1, water.k, water)
    with pytest.raises(SingularExpression):
        residual(TrialState(lam_tiny, 0.0, PeriodicFunction.zero(4)), water)


def test_galerkin_residual_matches_cos_coefficients(water):
    w = PeriodicFunction.harmonic(1, 1e-3, n_modes=8, kind="cos")
    state = TrialState(1.3, 0.0, w)
    proj = galerkin_residual(state, water)
    full = residual(state, water)
    np.testing.assert_array_equal(proj, full.cos_coeffs)
    assert proj.shape == (9,)


def test_trial_state_validation():
    with pytest.raises(ValueError):
        TrialState(1.0, 0.0, PeriodicFunction.harmonic(1, 1.0, kind="sin"))
    bad_mean = PeriodicFunction.constant(0.5, 4)
    with pytest.raises(ValueError):
        TrialState(1.0, 0.0, bad_mean)


def test_admissibility_of_laminar(water):
    report = check_admissibility(PeriodicFunction.zero(8), water)
    assert report.passed
    assert report.min_surface_height == pytest.approx(water.h)
    assert report.min_abscissa_slope == pytest.approx(1.0 / water.k)
    assert report.monotone_graph


def test_admissibility_flags_bed_contact(water):
    w = PeriodicFunction.harmonic(1, 0.15, n_modes=4, kind="cos")
    report = check_admissibility(w, water)
    assert not report.passed
    assert any("bed" in f for f in report.failures)


def test_admissibility_flags_non_graph(water):
    w = PeriodicFunction.harmonic(1, 0.09, n_modes=4, kind="cos")
    report = check_admissibility(w, water)
    assert not report.passed
    assert report.min_abscissa_slope < 0.0


def test_jacobian_active_subset(water):
    n = 6
    state = TrialState(1.3, 0.0, PeriodicFunction.zero(n))
    jac = jacobian_fd(state, water, active=("bernoulli_shift", "a3"), n_modes=n)
    assert jac.shape == (n + 1, 2)
    assert jac[0, 0] == pytest.approx(-1.0 / water.k**2, rel=1e-8)
    assert jac[3, 1] == pytest.approx(linearization_symbol(1.3, 3, water), rel=1e-5)
