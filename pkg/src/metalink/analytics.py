"""Closed-form link predictions, independent of numerical propagation.

Mode counts are space-bandwidth products of the surface areas; power
ratios follow the shear determinants.  Both are evaluated as pure
arithmetic so they can serve as cross-checks on the simulated fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .field import ComplexField, GridSpec

TWO_SURFACE_TOPOLOGIES = ("two_aligned", "two_unaligned")
THREE_SURFACE_TOPOLOGIES = (
    "three_rect", "three_gauss", "three_rect_unaligned", "three_gauss_unaligned"
)


@dataclass(frozen=True)
class ModeCountSpec:
    """Inputs of the mode-count formulas.

    Areas in m^2; gammas are the concentration factors that inflate the
    diffraction-limited spot into the per-mode footprint (default 2).
    Only the fields used by the chosen topology are required.
    """

    wavelength: float
    m_tx: float
    m_rx: float
    m_ris: Optional[float] = None
    R: Optional[float] = None
    R1: Optional[float] = None
    R2: Optional[float] = None
    det_T: Optional[float] = None
    det_T1: Optional[float] = None
    det_T2: Optional[float] = None
    gamma: float = 2.0
    gamma1: float = 2.0
    gamma2: float = 2.0


class SchemaError(ValueError):
    """A mode-count field required by the chosen topology is missing."""


def _need(spec: ModeCountSpec, topology: str, *names):
    vals = []
    for n in names:
        v = getattr(spec, n)
        if v is None:
            raise SchemaError(f"topology {topology!r} requires field {n!r}")
        vals.append(v)
    return vals


def mode_count(spec: ModeCountSpec, topology: str) -> float:
    """Number of independently transmittable spatial streams (real valued;
    flooring to an integer is left to the presentation layer)."""
    lam = spec.wavelength
    if topology == "two_aligned":
        (r,) = _need(spec, topology, "R")
        return spec.m_tx * spec.m_rx / (lam * r) ** 2
    if topology == "two_unaligned":
        r, det = _need(spec, topology, "R", "det_T")
        return spec.m_tx * spec.m_rx / (lam * r) ** 2 * det
    if topology in ("three_rect", "three_gauss"):
        r1, r2, m_ris = _need(spec, topology, "R1", "R2", "m_ris")
        g2 = spec.gamma**2 if topology == "three_rect" else (spec.gamma1 * spec.gamma2) ** 2
        return (1.0 / g2) * min(
            spec.m_tx * m_ris / (lam * r1) ** 2,
            m_ris * spec.m_rx / (lam * r2) ** 2,
        )
    if topology in ("three_rect_unaligned", "three_gauss_unaligned"):
        r1, r2, m_ris, d1, d2 = _need(
            spec, topology, "R1", "R2", "m_ris", "det_T1", "det_T2"
        )
        g2 = (
            spec.gamma**2
            if topology == "three_rect_unaligned"
            else (spec.gamma1 * spec.gamma2) ** 2
        )
        return (1.0 / g2) * min(
            spec.m_tx * m_ris / (lam * r1) ** 2 * d1,
            m_ris * spec.m_rx / (lam * r2) ** 2 * d2,
        )
    raise SchemaError(f"unknown topology {topology!r}")


def predicted_power_ratio(topology: str, det_T: float = None,
                          det_T1: float = None, det_T2: float = None):
    """Large-aperture power ratio(s) relative to the source power.

    Aligned links return 1.0; a two-surface tilted link returns |det T|;
    a three-surface tilted link returns the pair of stage ratios
    (|det T1|, |det T1|*|det T2|).
    """
    if topology in ("two_aligned", "three_aligned"):
        return 1.0
    if topology == "two_unaligned":
        if det_T is None:
            raise SchemaError("two_unaligned requires det_T")
        _check_unit_interval(det_T)
        return det_T
    if topology == "three_unaligned":
        if det_T1 is None or det_T2 is None:
            raise SchemaError("three_unaligned requires det_T1 and det_T2")
        _check_unit_interval(det_T1)
        _check_unit_interval(det_T2)
        return (det_T1, det_T1 * det_T2)
    raise SchemaError(f"unknown topology {topology!r}")


def _check_unit_interval(det):
    if not 0.0 <= det <= 1.0 + 1e-12:
        raise ValueError(f"shear determinant must lie in [0, 1], got {det!r}")


def normalized_coords(f: ComplexField, lam: float, R: float) -> ComplexField:
    """Rescale to dimensionless coordinates x' = x / sqrt(lam*R), with the
    amplitude scaled by sqrt(lam*R) so total power is preserved exactly.
    In these coordinates the hop kernel becomes exp(j 2 pi (x'u' + y'v'))."""
    s = np.sqrt(lam * R)
    if not s > 0:
        raise ValueError("lam * R must be positive")
    g = f.grid
    grid = GridSpec(nx=g.nx, ny=g.ny, dx=g.dx / s, dy=g.dy / s,
                    cx=g.cx / s, cy=g.cy / s)
    return ComplexField(grid, f.samples * s, f.stage_label)


@dataclass(frozen=True)
class PowerReport:
    """Measured stage powers next to the closed-form predictions."""

    measured: dict
    predicted_ratios: dict

    def __post_init__(self):
        for key, val in self.measured.items():
            if val < 0:
                raise ValueError(f"negative power for stage {key}: {val!r}")
