"""Physical parameter bundle shared by all modules."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalParams:
    """Fluid and geometry constants (unit-density normalization).

    g : gravitational acceleration (m/s^2)
    sigma : surface tension coefficient (m^3/s^2 per unit density)
    h : conformal mean depth (m)
    k : wavenumber 2 pi / wavelength (1/m)
    p_atm : atmospheric pressure constant (same normalized units)

    At least one of g, sigma must be positive.
    """

    g: float
    sigma: float
    h: float
    k: float
    p_atm: float = 0.0

    def __post_init__(self):
        vals = (self.g, self.sigma, self.h, self.k, self.p_atm)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("non-finite physical parameter")
        if self.g < 0.0 or self.sigma < 0.0:
            raise ValueError("g and sigma must be nonnegative")
        if self.g + self.sigma <= 0.0:
            raise ValueError("need g + sigma > 0")
        if self.h <= 0.0 or self.k <= 0.0:
            raise ValueError("depth and wavenumber must be positive")

    @property
    def strip_depth(self):
        """Dimensionless conformal strip depth k*h."""
        return self.k * self.h

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)
