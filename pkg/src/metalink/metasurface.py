"""Phase-shift profiles applied by each surface.

Each surface converts between the physical field hitting it and the
signal variable that obeys a pure Fourier-kernel relation.  The
profiles are quadratic lens terms plus, for tilted surfaces, linear
steering terms and a quadratic correction along the projected axis.

Phases are stored unwrapped so that analytic comparisons stay exact;
wrapping to [-pi, pi) is an export-time option (see gridio).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import GridSpec
from .geometry import DirectionCosines


@dataclass(frozen=True)
class PhaseProfile:
    """Real phase shift theta(x, y) sampled on a surface grid."""

    grid: GridSpec
    theta: np.ndarray
    recipe: str = ""

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        if t.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"theta shape {t.shape} does not match grid {self.grid.nx}x{self.grid.ny}"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("phase profile contains non-finite values")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)


def _check_positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def phase_two_surface(
    role: str, cos: DirectionCosines, k: float, R: float, grid: GridSpec
) -> PhaseProfile:
    """Transmit- or receive-side profile of a single link leg.

    role "tx":  theta = -k (a_rx x + a_ry y)
                        + (k/2R) [x^2 + y^2 - (a_rx x + a_ry y)^2]
    role "rx":  theta = +k (a_ru u + a_rv v)
                        + (k/2R) [u^2 + v^2 - (a_ru u + a_rv v)^2]

    With aligned cosines both reduce to the pure lens term
    (k/2R)(x^2 + y^2).
    """
    _check_positive("R", R)
    _check_positive("k", k)
    x, y = grid.meshgrid()
    if role == "tx":
        proj = cos.a_rx * x + cos.a_ry * y
        theta = -k * proj + (k / (2 * R)) * (x**2 + y**2 - proj**2)
        recipe = "tx_aligned" if cos.is_aligned else "tx_unaligned"
    elif role == "rx":
        proj = cos.a_ru * x + cos.a_rv * y
        theta = k * proj + (k / (2 * R)) * (x**2 + y**2 - proj**2)
        recipe = "rx_aligned" if cos.is_aligned else "rx_unaligned"
    else:
        raise ValueError(f"role must be 'tx' or 'rx', got {role!r}")
    return PhaseProfile(grid, theta, recipe)


def phase_ris(
    cos_in: DirectionCosines,
    cos_out: DirectionCosines,
    k: float,
    R1: float,
    R2: float,
    grid: GridSpec,
) -> PhaseProfile:
    """Relay-surface profile combining both link legs.

    ``cos_in`` are the cosines of the incoming leg with this surface on
    the receive side (so its in-plane projections are a_ru, a_rv);
    ``cos_out`` those of the outgoing leg with this surface on the
    transmit side (projections a_rx, a_ry).  The profile is exactly the
    sum of the receive-side profile of the incoming leg and the
    transmit-side profile of the outgoing leg.  Aligned it reduces to
    (k/2)(1/R1 + 1/R2)(p^2 + q^2).
    """
    rx_leg = phase_two_surface("rx", cos_in, k, R1, grid)
    tx_leg = phase_two_surface("tx", cos_out, k, R2, grid)
    aligned = cos_in.is_aligned and cos_out.is_aligned
    recipe = "ris_aligned" if aligned else "ris_unaligned"
    return PhaseProfile(grid, rx_leg.theta + tx_leg.theta, recipe)
