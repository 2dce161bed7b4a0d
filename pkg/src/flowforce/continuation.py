"""Small-amplitude branch tracing by amplitude-parametrized Newton steps.

Away from mode collisions the laminar flow sheds a curve of genuinely
periodic even waves.  The branch is parametrized by the first cosine
coefficient s of the elevation: s is frozen, and Newton's method solves
the Galerkin system for the squared surface speed, the Bernoulli shift
and the remaining coefficients a_2..a_N.  Successive amplitudes are
warm-started from the previous corrected state.
"""

from dataclasses import dataclass

import numpy as np

from .dispersion import kernel_is_simple, onset_speed_sq, transversality_value
from .errors import (
    InadmissibleIterate,
    KernelNotSimple,
    NoConvergence,
    SingularJacobian,
)
from .params import PhysicalParams
from .spectral import PeriodicFunction, derivative, grid_nodes
from .surface_equation import (
    TrialState,
    check_admissibility,
    galerkin_residual,
    jacobian_fd,
)

__all__ = [
    "BranchPoint",
    "Branch",
    "initial_guess",
    "newton_correct",
    "trace_branch",
    "branch_diagnostics",
]

_COND_LIMIT = 1e14


@dataclass(frozen=True)
class BranchPoint:
    """One corrected point of a bifurcating branch."""

    amplitude: float
    speed_sq: float
    bernoulli_shift: float
    elevation: PeriodicFunction
    residual_norm: float
    newton_iters: int

    def state(self):
        return TrialState(self.speed_sq, self.bernoulli_shift, self.elevation)


@dataclass(frozen=True)
class Branch:
    """A traced branch; points are ordered by increasing |amplitude|.

    failure is None for a complete trace, otherwise a short description
    of why the trace stopped early (the points already corrected are
    kept).
    """

    params: PhysicalParams
    onset_speed_sq: float
    transversality: float
    points: tuple
    n_modes: int
    failure: str | None = None

    @property
    def completed(self):
        return self.failure is None

    @property
    def amplitudes(self):
        return np.array([pt.amplitude for pt in self.points])


def initial_guess(s, p: PhysicalParams, n_modes=32):
    """Linear-theory predictor: onset speed, zero shift, s*cos(x).

    Only meaningful well inside the small-amplitude regime; amplitudes
    beyond a tenth of the depth are rejected.
    """
    n_modes = int(n_modes)
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if abs(s) > 0.1 * p.h:
        raise ValueError(
            f"amplitude {s:.3e} outside small-amplitude range (limit {0.1 * p.h:.3e})"
        )
    w = PeriodicFunction.harmonic(1, s, n_modes=n_modes, kind="cos")
    return TrialState(onset_speed_sq(1, p.k, p), 0.0, w)


def _with_amplitude(state, s, n_modes):
    """Copy of state with the first cosine coefficient pinned to s."""
    a = np.zeros(n_modes + 1)
    keep = min(n_modes, state.elevation.n_modes)
    a[: keep + 1] = state.elevation.cos_coeffs[: keep + 1]
    a[1] = s
    w = PeriodicFunction(a, np.zeros(n_modes), "even")
    return TrialState(state.speed_sq, state.bernoulli_shift, w)


def _active_labels(n_modes):
    return ("speed_sq", "bernoulli_shift") + tuple(
        f"a{j}" for j in range(2, n_modes + 1)
    )


def _apply_update(state, delta, labels, n_modes):
    a = np.zeros(n_modes + 1)
    keep = min(n_modes, state.elevation.n_modes)
    a[: keep + 1] = state.elevation.cos_coeffs[: keep + 1]
    speed_sq = state.speed_sq
    shift = state.bernoulli_shift
    for label, d in zip(labels, delta):
        if label == "speed_sq":
            speed_sq -= d
        elif label == "bernoulli_shift":
            shift -= d
        else:
            a[int(label[1:])] -= d
    w = PeriodicFunction(a, np.zeros(n_modes), "even")
    return TrialState(speed_sq, shift, w)


def newton_correct(state: TrialState, s, p: PhysicalParams, n_modes=None,
                   tol=1e-11, max_iter=25):
    """Correct a predictor at frozen amplitude s = first cosine coefficient.

    Returns (corrected TrialState, iterations, residual norm).  The
    convergence test runs before each Jacobian assembly, so a state that
    already satisfies the system costs no linear solves.  Raises
    SingularJacobian past condition 1e14, InadmissibleIterate when an
    iterate leaves the physical regime, NoConvergence after max_iter.
    """
    n = state.elevation.n_modes if n_modes is None else int(n_modes)
    labels = _active_labels(n)
    current = _with_amplitude(state, s, n)
    norm = float("inf")
    for it in range(max_iter + 1):
        r = galerkin_residual(current, p, n_modes=n)
        norm = float(np.max(np.abs(r)))
        if norm <= tol:
            return current, it, norm
        if it == max_iter:
            break
        jac = jacobian_fd(current, p, active=labels, n_modes=n)
        cond = float(np.linalg.cond(jac))
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise SingularJacobian(
                f"Galerkin Jacobian condition {cond:.3e} exceeds {_COND_LIMIT:.0e}"
            )
        delta = np.linalg.solve(jac, r)
        current = _apply_update(current, delta, labels, n)
        report = check_admissibility(current.elevation, p, n_modes=n)
        if not report.passed:
            raise InadmissibleIterate(
                "Newton iterate left the admissible set: "
                + "; ".join(report.failures)
            )
    raise NoConvergence(
        f"no convergence at amplitude {s:.6e} after {max_iter} iterations "
        f"(residual {norm:.3e})",
        iterations=max_iter,
        last_residual=norm,
    )


def trace_branch(s_max, steps, p: PhysicalParams, n_modes=32, tol=1e-11,
                 max_iter=25, scan_limit=1000, scan_tol=1e-10):
    """Trace the mode-1 branch at amplitudes s_j = s_max j / steps.

    The kernel at the chosen wavenumber must be simple (scan up to
    scan_limit modes); otherwise KernelNotSimple is raised.  A step that
    fails to converge truncates the branch and records the failure
    instead of raising.
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError("need at least one amplitude step")
    report = kernel_is_simple(p.k, p, n_max=scan_limit, tol=scan_tol)
    if not report.simple:
        raise KernelNotSimple(
            f"mode {report.colliding_mode} shares the onset value at "
            f"k = {p.k} (relative gap {report.min_relative_gap:.3e})"
        )
    onset = onset_speed_sq(1, p.k, p)
    crossing = transversality_value(p.k, p)
    points = []
    failure = None
    predictor = initial_guess(s_max / steps, p, n_modes)
    for j in range(1, steps + 1):
        s_j = s_max * j / steps
        try:
            corrected, iters, norm = newton_correct(
                predictor, s_j, p, n_modes=n_modes, tol=tol, max_iter=max_iter
            )
        except (NoConvergence, SingularJacobian, InadmissibleIterate) as exc:
            failure = f"step {j} at amplitude {s_j:.6e}: {exc}"
            break
        points.append(
            BranchPoint(
                amplitude=s_j,
                speed_sq=corrected.speed_sq,
                bernoulli_shift=corrected.bernoulli_shift,
                elevation=corrected.elevation,
                residual_norm=norm,
                newton_iters=iters,
            )
        )
        predictor = corrected
    return Branch(
        params=p,
        onset_speed_sq=onset,
        transversality=crossing,
        points=tuple(points),
        n_modes=n_modes,
        failure=failure,
    )


def _crest_trough_counts(values):
    """Counts of strict local maxima/minima on the periodic grid."""
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    crests = int(np.sum((values > left) & (values > right)))
    troughs = int(np.sum((values < left) & (values < right)))
    return crests, troughs


def branch_diagnostics(branch: Branch):
    """Structural health metrics for every branch point.

    Each entry reports the evenness defect of the profile, crest and
    trough counts over one period, whether the profile decreases
    strictly from crest to trough on (0, pi) (signed by the amplitude),
    admissibility, spectral tail content, the distance of the speed
    parameter from its onset value, and the deviation from the linear
    predictor normalized by amplitude.
    """
    p = branch.params
    out = []
    for pt in branch.points:
        w = pt.elevation
        m = max(64, 4 * w.n_modes)
        x = grid_nodes(m)
        vals = w.eval_at(x)
        evenness = float(np.max(np.abs(vals - w.eval_at(-x))))
        crests, troughs = _crest_trough_counts(vals)
        slope = derivative(w).eval_at(x[(x > 1e-9) & (x < np.pi - 1e-9)])
        monotone = bool(np.all(np.sign(pt.amplitude) * slope < 0.0))
        admiss = check_admissibility(w, p, n_modes=branch.n_modes)
        secant = w - PeriodicFunction.harmonic(
            1, pt.amplitude, n_modes=w.n_modes, kind="cos"
        )
        out.append(
            {
                "amplitude": pt.amplitude,
                "evenness_defect": evenness,
                "crest_count": crests,
                "trough_count": troughs,
                "monotone_profile": monotone,
                "admissible": admiss.passed,
                "tail_energy_fraction": w.tail_energy_fraction(),
                "onset_distance": abs(pt.speed_sq - branch.onset_speed_sq),
                "predictor_defect": secant.sup_norm() / abs(pt.amplitude),
                "newton_iters": pt.newton_iters,
                "residual_norm": pt.residual_norm,
            }
        )
    return out
