"""Quasilinear residual of the free-surface equation and its linearization.

The unknown is the zero-mean even elevation w of the surface in
conformal variables (v = w + h), together with the squared laminar
surface speed (the bifurcation parameter) and a constant Bernoulli
shift.  The residual assembled here is the pointwise left side of the
rewritten surface equation

    (A*(1/k + C(w')) - B*w')^2 / D
      + A*w' + B*(1/k + C(w'))
      - (p_atm - sigma*T) * metric
      - (speed_sq + shift + 2*sigma*T - 2*g*w) * metric  =  0

with C = hilbert transform of the strip of depth k*h,
metric = w'^2 + (1/k + C(w'))^2, curvature term
T = (w''/k + w'' C(w') - w' C(w'')) / metric^(3/2), and
D = A*w' + B*(1/k + C(w')) - (p_atm - sigma*T)*metric.

A and B are the tangential and normal boundary derivative coefficients
of the conjugated flow-force potential; their closed forms live in
tangent_coeff / normal_coeff.  Nonlinear algebra happens on an
oversampled collocation grid; every transform step truncates back to
the working mode count.
"""

from dataclasses import dataclass

import numpy as np

from .dispersion import onset_speed_sq
from .errors import MeanNotZero, SingularExpression
from .params import PhysicalParams
from .spectral import (
    PeriodicFunction,
    analyze,
    derivative,
    grid_nodes,
    hilbert_strip,
    scaled_coth,
)

__all__ = [
    "PhysicalParams",
    "TrialState",
    "AdmissibilityReport",
    "tangent_coeff",
    "normal_coeff",
    "residual",
    "galerkin_residual",
    "linearization_symbol",
    "jacobian_fd",
    "check_admissibility",
    "unknown_labels",
]

_METRIC_FLOOR = 1e-10
_MEAN_TOL = 1e-10


@dataclass(frozen=True)
class TrialState:
    """One point of the extended unknown space.

    speed_sq : squared laminar surface speed (bifurcation parameter)
    bernoulli_shift : offset of the Bernoulli constant from its laminar value
    elevation : zero-mean even surface elevation in conformal variables
    """

    speed_sq: float
    bernoulli_shift: float
    elevation: PeriodicFunction

    def __post_init__(self):
        w = self.elevation
        if w.parity != "even":
            raise ValueError("elevation must live in the even (cosine) space")
        scale = max(1.0, float(np.max(np.abs(w.cos_coeffs))))
        if abs(w.mean()) > 1e-12 * scale:
            raise ValueError("elevation must have zero mean")


def _grid_arrays(w, p, n_modes):
    """Shared sample arrays of w and its strip-transform derivatives."""
    n = w.n_modes if n_modes is None else int(n_modes)
    m = max(8, 4 * max(1, n))
    d = p.strip_depth
    wp = derivative(w)
    wpp = derivative(wp)
    cwp = hilbert_strip(wp, d)
    cwpp = hilbert_strip(wpp, d)
    w_s = w.samples(m)
    wp_s = wp.samples(m)
    wpp_s = wpp.samples(m)
    cwp_s = cwp.samples(m)
    cwpp_s = cwpp.samples(m)
    dnv = 1.0 / p.k + cwp_s
    metric = wp_s**2 + dnv**2
    low = float(np.min(metric))
    if low < _METRIC_FLOOR:
        j = int(np.argmin(metric))
        raise SingularExpression(
            f"metric factor {low:.3e} below floor {_METRIC_FLOOR:.0e}",
            node_x=float(grid_nodes(m)[j]),
            value=low,
        )
    return {
        "n": n,
        "m": m,
        "d": d,
        "w": w_s,
        "wp": wp_s,
        "wpp": wpp_s,
        "cwp": cwp_s,
        "cwpp": cwpp_s,
        "dnv": dnv,
        "metric": metric,
        "sqrt_metric": np.sqrt(metric),
        "metric32": metric**1.5,
    }


def _strip_transform(values, dat, label, diag):
    """Apply the strip Hilbert transform to grid values, mean-corrected.

    The analytic arguments are exact x-derivatives (zero mean); the
    collocation mean picks up only aliasing dust.  It is subtracted,
    recorded, and trips MeanNotZero when it is genuinely large.
    """
    f = analyze(values).truncated(dat["n"])
    mean = f.mean()
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(mean) > _MEAN_TOL * scale:
        raise MeanNotZero(f"inner transform argument {label!r} has mean {mean:.3e}")
    if diag is not None:
        diag.setdefault("subtracted_means", {})[label] = mean
    g = hilbert_strip(f - mean, dat["d"])
    return g.samples(dat["m"])


def _tangent_samples(dat, p):
    tnum = dat["wpp"] / p.k + dat["wpp"] * dat["cwp"] - dat["wp"] * dat["cwpp"]
    return p.p_atm * dat["wp"] - p.sigma * dat["wp"] * tnum / dat["metric32"]


def _normal_samples(dat, p, speed_sq, diag):
    wp, dnv = dat["wp"], dat["dnv"]
    sq = dat["sqrt_metric"]
    den = sq * (dnv + sq)
    low = float(np.min(np.abs(den)))
    if low < _METRIC_FLOOR:
        j = int(np.argmin(np.abs(den)))
        raise SingularExpression(
            f"bracket denominator {low:.3e} below floor",
            node_x=float(grid_nodes(dat["m"])[j]),
            value=low,
        )
    bracket = float(np.mean(wp**2 / den))
    g_inner = _strip_transform(dat["w"] * wp, dat, "w*w'", diag)
    flux = (dat["cwpp"] * wp**2 - dnv * dat["wpp"] * wp) / dat["metric32"]
    flux_t = _strip_transform(flux, dat, "curvature flux", diag)
    kh = p.k * p.h
    g_part = (
        float(np.mean(dat["w"] ** 2)) / (2.0 * kh)
        - dat["w"] / p.k
        + g_inner
        - dat["w"] * dat["cwp"]
    )
    if diag is not None:
        diag["bracket_average"] = bracket
    return (
        speed_sq / p.k
        - (p.sigma / kh) * bracket
        + p.g * g_part
        + p.sigma * flux_t
        + p.p_atm * dnv
    )


def tangent_coeff(w, p: PhysicalParams, n_modes=None):
    """Tangential boundary-derivative coefficient (odd for even w)."""
    dat = _grid_arrays(w, p, n_modes)
    return analyze(_tangent_samples(dat, p)).truncated(dat["n"])


def normal_coeff(w, speed_sq, p: PhysicalParams, n_modes=None, diag=None):
    """Normal boundary-derivative coefficient (even for even w)."""
    dat = _grid_arrays(w, p, n_modes)
    return analyze(_normal_samples(dat, p, speed_sq, diag)).truncated(dat["n"])


def residual(state: TrialState, p: PhysicalParams, n_modes=None, diag=None):
    """Pointwise residual of the rewritten surface equation (even space).

    Vanishes identically on the trivial branch with zero shift and
    equals -shift/k^2 for any constant shift.
    """
    dat = _grid_arrays(state.elevation, p, n_modes)
    a_s = _tangent_samples(dat, p)
    b_s = _normal_samples(dat, p, state.speed_sq, diag)
    wp, dnv, metric = dat["wp"], dat["dnv"], dat["metric"]
    tnum = dat["wpp"] / p.k + dat["wpp"] * dat["cwp"] - dat["wp"] * dat["cwpp"]
    t_s = tnum / dat["metric32"]
    d_s = a_s * wp + b_s * dnv - (p.p_atm - p.sigma * t_s) * metric
    floor = 1e-8 * onset_speed_sq(1, p.k, p)
    low = float(np.min(np.abs(d_s)))
    if low < floor:
        j = int(np.argmin(np.abs(d_s)))
        raise SingularExpression(
            f"quotient denominator {low:.3e} below floor {floor:.3e}",
            node_x=float(grid_nodes(dat["m"])[j]),
            value=low,
        )
    res = (
        (a_s * dnv - b_s * wp) ** 2 / d_s
        + a_s * wp
        + b_s * dnv
        - (p.p_atm - p.sigma * t_s) * metric
        - (state.speed_sq + state.bernoulli_shift + 2.0 * p.sigma * t_s - 2.0 * p.g * dat["w"])
        * metric
    )
    full = analyze(res)
    if diag is not None:
        diag["sine_energy_fraction"] = full.sine_energy_fraction()
        diag["min_quotient_denominator"] = low
        diag["min_metric"] = float(np.min(metric))
    return full.truncated(dat["n"]).as_even()


def galerkin_residual(state: TrialState, p: PhysicalParams, n_modes=None, diag=None):
    """Cosine-mode projections r_n, n = 0..N, of the residual."""
    return residual(state, p, n_modes=n_modes, diag=diag).cos_coeffs.copy()


def linearization_symbol(speed_sq, mode, p: PhysicalParams):
    """Diagonal action m_n of the trivial-state linearization on cos(nx).

    m_n = -(1/k^2) (speed_sq * k n coth(n k h) - sigma k^2 n^2 - g);
    the constant mode responds to the Bernoulli shift with -1/k^2.
    """
    mode = int(mode)
    if mode < 1:
        raise ValueError("mode index must be >= 1")
    k = p.k
    coth = float(scaled_coth(np.array([mode * k * p.h]))[0])
    return -(speed_sq * k * mode * coth - p.sigma * k * k * mode * mode - p.g) / (k * k)


def unknown_labels(n_modes):
    """Canonical unknown ordering (speed_sq, shift, a1..aN)."""
    return ("speed_sq", "bernoulli_shift") + tuple(
        f"a{j}" for j in range(1, n_modes + 1)
    )


def _with_unknown(state, label, value, n_modes):
    if label == "speed_sq":
        return TrialState(value, state.bernoulli_shift, state.elevation)
    if label == "bernoulli_shift":
        return TrialState(state.speed_sq, value, state.elevation)
    j = int(label[1:])
    a = np.zeros(n_modes + 1)
    keep = min(n_modes, state.elevation.n_modes)
    a[: keep + 1] = state.elevation.cos_coeffs[: keep + 1]
    a[j] = value
    w = PeriodicFunction(a, np.zeros(n_modes), "even")
    return TrialState(state.speed_sq, state.bernoulli_shift, w)


def _unknown_value(state, label):
    if label == "speed_sq":
        return state.speed_sq
    if label == "bernoulli_shift":
        return state.bernoulli_shift
    j = int(label[1:])
    a = state.elevation.cos_coeffs
    return float(a[j]) if j < a.size else 0.0


def jacobian_fd(state: TrialState, p: PhysicalParams, active=None, n_modes=None,
                step_scale=1e-6):
    """Central-difference Jacobian of the Galerkin residual.

    Rows are the projection modes n = 0..N; columns follow `active`,
    a sequence of labels from unknown_labels(N) (default: all of them).
    Step per unknown: step_scale * max(1, |value|).
    """
    n = state.elevation.n_modes if n_modes is None else int(n_modes)
    labels = unknown_labels(n) if active is None else tuple(active)
    cols = []
    for label in labels:
        theta = _unknown_value(state, label)
        eps = step_scale * max(1.0, abs(theta))
        hi = galerkin_residual(_with_unknown(state, label, theta + eps, n), p, n)
        lo = galerkin_residual(_with_unknown(state, label, theta - eps, n), p, n)
        cols.append((hi - lo) / (2.0 * eps))
    return np.column_stack(cols)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Margins of the physical admissibility guards; all must be positive."""

    min_surface_height: float
    min_abscissa_slope: float
    min_metric: float
    monotone_graph: bool
    failures: tuple
    passed: bool


def check_admissibility(w, p: PhysicalParams, n_modes=None):
    """Evaluate the admissibility guards on the collocation grid.

    Never raises; violations are reported in `failures`.
    """
    n = w.n_modes if n_modes is None else int(n_modes)
    m = max(8, 4 * max(1, n))
    d = p.strip_depth
    w0 = w - w.mean()
    wp = derivative(w0)
    cwp_s = hilbert_strip(wp, d).samples(m)
    wp_s = wp.samples(m)
    w_s = w.samples(m)
    dnv = 1.0 / p.k + cwp_s
    metric = wp_s**2 + dnv**2
    surface_x = grid_nodes(m) / p.k + hilbert_strip(w0, d).samples(m)
    steps = np.diff(surface_x)
    wrap = surface_x[0] + 2.0 * np.pi / p.k - surface_x[-1]
    monotone = bool(np.all(steps > 0.0) and wrap > 0.0)
    min_height = float(np.min(w_s) + p.h)
    min_slope = float(np.min(dnv))
    min_metric = float(np.min(metric))
    failures = []
    if not min_height > 0.0:
        failures.append("surface touches bed")
    if not min_slope > 0.0:
        failures.append("abscissa slope not positive")
    if not min_metric > 0.0:
        failures.append("degenerate surface metric")
    if not monotone:
        failures.append("graph map not monotone")
    return AdmissibilityReport(
        min_surface_height=min_height,
        min_abscissa_slope=min_slope,
        min_metric=min_metric,
        monotone_graph=monotone,
        failures=tuple(failures),
        passed=not failures,
    )
