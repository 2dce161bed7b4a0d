"""Fourier series on the circle and harmonic operators on a periodic strip.

Everything here works with real trigonometric polynomials

    f(x) = a_0 + sum_n a_n cos(nx) + b_n sin(nx)

sampled on uniform grids over [0, 2pi).  The strip operators (Hilbert
transform, Dirichlet-Neumann map, harmonic/conjugate extensions) act
through their Fourier multipliers on the strip -d < y < 0 with data on
the top boundary and a homogeneous Dirichlet bottom.  All hyperbolic
ratios are evaluated in exponentially scaled form so large n*d never
overflows.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidSamples, MeanNotZero, SingularExpression

__all__ = [
    "PeriodicFunction",
    "StripParams",
    "StripGridField",
    "analyze",
    "derivative",
    "hilbert_strip",
    "dirichlet_neumann",
    "harmonic_extension",
    "conjugate_extension",
    "pointwise_compose",
    "grid_nodes",
    "scaled_coth",
    "sinh_ratio",
    "cosh_ratio",
]

_PARITY_TOL = 1e-12


def grid_nodes(m):
    """Uniform collocation nodes x_j = 2 pi j / m, j = 0..m-1."""
    return 2.0 * np.pi * np.arange(m) / m


@lru_cache(maxsize=64)
def _trig_matrices(m, n_modes):
    """Cached cos/sin evaluation matrices, shape (n_modes, m)."""
    x = grid_nodes(m)
    n = np.arange(1, n_modes + 1)
    arg = np.outer(n, x)
    cos_mat = np.cos(arg)
    sin_mat = np.sin(arg)
    cos_mat.flags.writeable = False
    sin_mat.flags.writeable = False
    return cos_mat, sin_mat


def scaled_coth(z):
    """coth(z) for z > 0 without overflow; exactly 1.0 once z is large."""
    z = np.asarray(z, dtype=float)
    zc = np.minimum(z, 19.0)
    out = 1.0 + 2.0 / np.expm1(2.0 * zc)
    return np.where(z >= 19.0, 1.0, out)


def sinh_ratio(modes, y, d):
    """sinh(n(y+d))/sinh(nd) for y in [-d, 0], exponentially scaled.

    Returns a matrix over (len(y), len(modes)).  Exact 1 at y = 0 and
    exact 0 at y = -d by construction.
    """
    n = np.asarray(modes, dtype=float)
    y = np.asarray(y, dtype=float)
    grow = np.exp(np.outer(y, n))
    top = 1.0 - np.exp(-2.0 * np.outer(y + d, n))
    bot = 1.0 - np.exp(-2.0 * d * n)
    return grow * top / bot


def cosh_ratio(modes, y, d):
    """cosh(n(y+d))/sinh(nd), exponentially scaled; coth(nd) at y = 0."""
    n = np.asarray(modes, dtype=float)
    y = np.asarray(y, dtype=float)
    grow = np.exp(np.outer(y, n))
    top = 1.0 + np.exp(-2.0 * np.outer(y + d, n))
    bot = 1.0 - np.exp(-2.0 * d * n)
    return grow * top / bot


@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    """Real trigonometric polynomial stored by cosine/sine coefficients.

    cos_coeffs holds a_0..a_N, sin_coeffs holds b_1..b_N.  parity is
    "even" (sine storage forced to zero) or "general".
    """

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    parity: str = "general"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.cos_coeffs, dtype=float)).copy()
        b = np.atleast_1d(np.asarray(self.sin_coeffs, dtype=float)).copy()
        if a.ndim != 1 or b.ndim != 1 or b.size != a.size - 1:
            raise InvalidSamples(
                "coefficient arrays must be 1-D with len(sin) = len(cos) - 1"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidSamples("non-finite coefficients")
        if self.parity not in ("even", "general"):
            raise ValueError(f"unknown parity tag {self.parity!r}")
        if self.parity == "even":
            scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
            if b.size and float(np.max(np.abs(b))) > _PARITY_TOL * scale:
                raise InvalidSamples("parity tagged even but sine content present")
            b = np.zeros_like(b)
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_modes, parity="even"):
        return cls(np.zeros(n_modes + 1), np.zeros(n_modes), parity)

    @classmethod
    def constant(cls, value, n_modes=0):
        a = np.zeros(n_modes + 1)
        a[0] = value
        return cls(a, np.zeros(n_modes), "even")

    @classmethod
    def harmonic(cls, mode, amplitude=1.0, n_modes=None, kind="cos"):
        """amplitude * cos(mode x) or sin(mode x)."""
        n = mode if n_modes is None else n_modes
        if n < mode:
            raise ValueError("n_modes too small for requested mode")
        a = np.zeros(n + 1)
        b = np.zeros(n)
        if kind == "cos":
            a[mode] = amplitude
            return cls(a, b, "even")
        b[mode - 1] = amplitude
        return cls(a, b, "general")

    @classmethod
    def from_cosines(cls, cos_coeffs):
        a = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        return cls(a, np.zeros(a.size - 1), "even")

    # -- basic queries ------------------------------------------------

    @property
    def n_modes(self):
        return self.cos_coeffs.size - 1

    def mean(self):
        return float(self.cos_coeffs[0])

    def default_grid(self):
        return max(8, 4 * self.n_modes)

    def samples(self, m=None):
        """Values on the uniform m-point grid (exact trig evaluation)."""
        m = self.default_grid() if m is None else int(m)
        if m < 1:
            raise InvalidSamples("grid size must be positive")
        n = self.n_modes
        out = np.full(m, self.cos_coeffs[0])
        if n:
            cos_mat, sin_mat = _trig_matrices(m, n)
            out = out + self.cos_coeffs[1:] @ cos_mat
            if self.parity != "even":
                out = out + self.sin_coeffs @ sin_mat
        return out

    def eval_at(self, x):
        """Evaluate at arbitrary points."""
        x = np.asarray(x, dtype=float)
        n = np.arange(1, self.n_modes + 1)
        arg = np.multiply.outer(x, n)
        out = self.cos_coeffs[0] + np.cos(arg) @ self.cos_coeffs[1:]
        if self.parity != "even":
            out = out + np.sin(arg) @ self.sin_coeffs
        return out

    def sup_norm(self, m=None):
        return float(np.max(np.abs(self.samples(m))))

    # -- structure ----------------------------------------------------

    def truncated(self, n_modes):
        """Keep modes <= n_modes (zero-padding when extending)."""
        n_modes = int(n_modes)
        a = np.zeros(n_modes + 1)
        b = np.zeros(n_modes)
        keep = min(n_modes, self.n_modes)
        a[: keep + 1] = self.cos_coeffs[: keep + 1]
        b[:keep] = self.sin_coeffs[:keep]
        return PeriodicFunction(a, b, self.parity)

    def as_even(self):
        """Project onto the even (cosine) space."""
        return PeriodicFunction(
            self.cos_coeffs, np.zeros(self.n_modes), "even"
        )

    def sine_energy_fraction(self):
        """Energy of the sine part relative to total oscillatory energy."""
        osc = float(self.cos_coeffs[1:] @ self.cos_coeffs[1:])
        sin = float(self.sin_coeffs @ self.sin_coeffs)
        total = osc + sin
        return 0.0 if total == 0.0 else sin / total

    def tail_energy_fraction(self, fraction=0.25):
        """Energy fraction carried by the top `fraction` of mode numbers."""
        n = self.n_modes
        if n == 0:
            return 0.0
        cut = n - max(1, int(np.ceil(fraction * n)))
        en = self.cos_coeffs[1:] ** 2 + self.sin_coeffs**2
        total = float(np.sum(en))
        return 0.0 if total == 0.0 else float(np.sum(en[cut:])) / total

    # -- arithmetic (coefficient-wise; products live in pointwise_compose)

    def __add__(self, other):
        if isinstance(other, PeriodicFunction):
            n = max(self.n_modes, other.n_modes)
            f, g = self.truncated(n), other.truncated(n)
            parity = "even" if (f.parity == g.parity == "even") else "general"
            return PeriodicFunction(
                f.cos_coeffs + g.cos_coeffs, f.sin_coeffs + g.sin_coeffs, parity
            )
        a = self.cos_coeffs.copy()
        a[0] += float(other)
        return PeriodicFunction(a, self.sin_coeffs, self.parity)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFunction(-self.cos_coeffs, -self.sin_coeffs, self.parity)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PeriodicFunction) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, scalar):
        c = float(scalar)
        return PeriodicFunction(c * self.cos_coeffs, c * self.sin_coeffs, self.parity)

    __rmul__ = __mul__


def analyze(samples):
    """Trigonometric interpolation coefficients of uniform grid samples.

    Modes up to (M-1)//2 are kept (the Nyquist mode of an even-length
    grid is dropped).  Parity is detected within 1e-12 and tagged.
    """
    vals = np.asarray(samples, dtype=float)
    if vals.ndim != 1 or vals.size < 2:
        raise InvalidSamples("need a 1-D sample array of length >= 2")
    if not np.all(np.isfinite(vals)):
        raise InvalidSamples("non-finite sample values")
    m = vals.size
    spec = np.fft.rfft(vals)
    n_max = (m - 1) // 2
    a = np.empty(n_max + 1)
    a[0] = spec[0].real / m
    a[1:] = 2.0 * spec[1 : n_max + 1].real / m
    b = -2.0 * spec[1 : n_max + 1].imag / m
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))) if b.size else 0.0)
    if b.size == 0 or float(np.max(np.abs(b))) <= _PARITY_TOL * scale:
        return PeriodicFunction(a, np.zeros_like(b), "even")
    return PeriodicFunction(a, b, "general")


def derivative(f):
    """Spectral derivative: (a_n, b_n) -> (n b_n, -n a_n)."""
    n = np.arange(1, f.n_modes + 1)
    a = np.zeros(f.n_modes + 1)
    a[1:] = n * f.sin_coeffs
    b = -n * f.cos_coeffs[1:]
    return PeriodicFunction(a, b, "general")


def _depth_value(d):
    val = d.d if isinstance(d, StripParams) else float(d)
    if not (val > 0.0) or not np.isfinite(val):
        raise ValueError("strip depth must be positive and finite")
    return val


@dataclass(frozen=True)
class StripParams:
    """Depth d of the reference strip -d < y < 0 (d = k*h in applications)."""

    d: float

    def __post_init__(self):
        if not (self.d > 0.0) or not np.isfinite(self.d):
            raise ValueError("strip depth must be positive and finite")


@dataclass(frozen=True, eq=False)
class StripGridField:
    """Real field sampled on the strip grid x_j = 2 pi j / n_x, y_m = -d + d m / n_y.

    Row 0 is the bottom (y = -d), the last row the top boundary (y = 0).
    """

    values: np.ndarray
    depth: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise InvalidSamples("field values must be a (n_y+1, n_x) matrix")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "depth", float(self.depth))

    @property
    def n_y(self):
        return self.values.shape[0] - 1

    @property
    def n_x(self):
        return self.values.shape[1]

    @property
    def x_nodes(self):
        return grid_nodes(self.n_x)

    @property
    def y_nodes(self):
        frac = np.arange(self.n_y + 1) / self.n_y
        return self.depth * (frac - 1.0)

    @property
    def bottom_row(self):
        return self.values[0]

    @property
    def top_row(self):
        return self.values[-1]


def hilbert_strip(f, d):
    """Periodic Hilbert transform for the strip of depth d.

    Multiplier action: a_n cos nx -> a_n coth(nd) sin nx and
    b_n sin nx -> -b_n coth(nd) cos nx.  Defined on zero-mean data only.
    """
    dv = _depth_value(d)
    scale = max(1.0, float(np.max(np.abs(f.cos_coeffs))),
                float(np.max(np.abs(f.sin_coeffs))) if f.n_modes else 0.0)
    if abs(f.mean()) > 1e-12 * scale:
        raise MeanNotZero(f"hilbert_strip needs zero-mean input, mean = {f.mean():.3e}")
    n = np.arange(1, f.n_modes + 1)
    coth = scaled_coth(n * dv)
    a = np.zeros(f.n_modes + 1)
    a[1:] = -coth * f.sin_coeffs
    b = coth * f.cos_coeffs[1:]
    return PeriodicFunction(a, b, "general")


def dirichlet_neumann(f, d):
    """Dirichlet-Neumann map of the strip: mean/d plus n coth(nd) per mode."""
    dv = _depth_value(d)
    n = np.arange(1, f.n_modes + 1)
    mult = n * scaled_coth(n * dv)
    a = np.empty(f.n_modes + 1)
    a[0] = f.cos_coeffs[0] / dv
    a[1:] = mult * f.cos_coeffs[1:]
    b = mult * f.sin_coeffs
    return PeriodicFunction(a, b, f.parity)


def _extension_grids(f, d, n_y, n_x):
    if n_y < 2:
        raise ValueError("need at least two vertical intervals")
    n_x = f.default_grid() if n_x is None else int(n_x)
    frac = np.arange(n_y + 1) / n_y
    y = d * (frac - 1.0)
    return n_x, frac, y


def harmonic_extension(f, d, n_y, n_x=None):
    """Harmonic extension into the strip, zero on the bottom, f on top.

    Per mode: sinh(n(y+d))/sinh(nd); the mean extends linearly in y.
    The vertical grid has n_y uniform intervals (n_y + 1 rows).
    """
    dv = _depth_value(d)
    n_x, frac, y = _extension_grids(f, dv, n_y, n_x)
    vals = np.outer(frac, np.full(n_x, f.cos_coeffs[0]))
    if f.n_modes:
        modes = np.arange(1, f.n_modes + 1)
        ratio = sinh_ratio(modes, y, dv)
        cos_mat, sin_mat = _trig_matrices(n_x, f.n_modes)
        vals = vals + (ratio * f.cos_coeffs[1:]) @ cos_mat
        vals = vals + (ratio * f.sin_coeffs) @ sin_mat
    return StripGridField(vals, dv)


def conjugate_extension(f, d, n_y, n_x=None):
    """Harmonic conjugate of the extension (oscillatory modes only).

    Sign convention: with W the harmonic extension and Z this field,
    Z_x = W_y and Z_y = -W_x.  Per mode a_n cos nx -> a_n
    [cosh(n(y+d))/sinh(nd)] sin nx and b_n sin nx -> -b_n [...] cos nx,
    so the top trace of zero-mean data is hilbert_strip(f).  The mean
    mode's conjugate is the non-periodic linear part mean/d * x, which
    the caller adds where needed.
    """
    dv = _depth_value(d)
    n_x, _, y = _extension_grids(f, dv, n_y, n_x)
    vals = np.zeros((n_y + 1, n_x))
    if f.n_modes:
        modes = np.arange(1, f.n_modes + 1)
        ratio = cosh_ratio(modes, y, dv)
        cos_mat, sin_mat = _trig_matrices(n_x, f.n_modes)
        vals = (ratio * f.cos_coeffs[1:]) @ sin_mat
        vals = vals - (ratio * f.sin_coeffs) @ cos_mat
    return StripGridField(vals, dv)


def pointwise_compose(expr, *funcs, n_modes=None, denominator=None, floor=1e-10):
    """Evaluate an algebraic expression of several functions by collocation.

    The inputs are sampled on a shared oversampled grid (4x the target
    mode count), expr is applied to the sample arrays, and the result is
    re-expanded and truncated back to n_modes.  When `denominator` is
    given it is evaluated first and checked against `floor`; a node
    below the floor raises SingularExpression with its location.
    """
    if not funcs and n_modes is None:
        raise ValueError("need at least one function or an explicit n_modes")
    n_target = max(f.n_modes for f in funcs) if funcs else 0
    if n_modes is not None:
        n_target = int(n_modes)
    n_eval = max(n_target, max((f.n_modes for f in funcs), default=0))
    m = max(8, 4 * max(1, n_eval))
    arrays = [f.samples(m) for f in funcs]
    if denominator is not None:
        den = np.asarray(denominator(*arrays), dtype=float)
        bad = np.abs(den) < floor
        if np.any(bad):
            j = int(np.argmax(bad))
            raise SingularExpression(
                f"denominator {den[j]:.3e} below floor {floor:.3e}",
                node_x=float(grid_nodes(m)[j]),
                value=float(den[j]),
            )
    vals = np.asarray(expr(*arrays), dtype=float)
    if vals.shape != (m,):
        vals = np.broadcast_to(vals, (m,)).astype(float)
    if not np.all(np.isfinite(vals)):
        raise InvalidSamples("expression produced non-finite values")
    return analyze(vals).truncated(n_target)
