"""Numerical evaluation of the link propagation integrals.

Two domains are supported:

* signal domain -- stages related by a pure Fourier kernel
  exp(j (k/R) (x u + y v)) with prefactor j exp(-jkR)/(lam R), plus,
  for tilted surfaces, a constant obliquity amplitude and a 2x2 shear
  of the transverse coordinates;
* field domain -- the physical quadratic-phase diffraction integral,
  evaluated by masking the input/output with the surface phase
  profiles and reusing the signal-domain kernel.

Backends:

* ``separable_sheared_dft`` (default): shear handled by an affine
  resample, then two separable one-dimensional kernel passes
  (matrix products), O(N^3);
* ``direct_quadrature``: the full non-separable Riemann sum over all
  input/output node pairs, O(N^4), for cross-validation;
* ``exact_kernel``: spherical-wave integral exp(-jk d)/d with the true
  3-D distance, no paraxial expansion; validation tool, aligned frames
  only, grids capped at 128x128.

All quadrature is midpoint Riemann with uniform dx*dy weights;
summations use numpy's pairwise accumulation and are deterministic
run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import AliasingError, ConditioningError, MetalinkError
from .field import ComplexField, GridSpec, resample_affine
from .geometry import DirectionCosines, LinkAxis, ShearMatrix, shear_matrix
from .metasurface import phase_two_surface

BACKENDS = ("separable_sheared_dft", "direct_quadrature", "exact_kernel")
EXACT_KERNEL_MAX_NODES = 128 * 128
#: paraxial validity: max transverse offset over distance
FRESNEL_MAX_APERTURE_RATIO = 0.2


@dataclass(frozen=True)
class PropagationSpec:
    """Wavelength, link axis, and tilt description of one propagation leg."""

    wavelength: float
    axis: LinkAxis
    cosines: DirectionCosines = dc_field(default_factory=DirectionCosines.aligned)
    backend: str = "separable_sheared_dft"

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")

    @classmethod
    def aligned(cls, wavelength: float, distance: float,
                backend: str = "separable_sheared_dft") -> "PropagationSpec":
        return cls(wavelength=wavelength, axis=LinkAxis.canonical(distance),
                   backend=backend)

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def distance(self) -> float:
        return self.axis.distance

    @property
    def obliquity(self) -> float:
        return self.cosines.obliquity

    def fresnel_aperture_ratio(self, in_grid: GridSpec, out_grid: GridSpec) -> float:
        """max |transverse offset| / distance over both axes."""
        rx = (in_grid.half_width_x + out_grid.half_width_x) / self.distance
        ry = (in_grid.half_width_y + out_grid.half_width_y) / self.distance
        return max(rx, ry)

    def fresnel_valid(self, in_grid: GridSpec, out_grid: GridSpec) -> bool:
        ratio = self.fresnel_aperture_ratio(in_grid, out_grid)
        return ratio <= FRESNEL_MAX_APERTURE_RATIO + 1e-12


def required_spacing(lam: float, R: float, in_half: float, out_half: float) -> float:
    """Anti-aliasing bound: spacing <= lam*R / (2*(X_half + U_half)),
    from the maximum local spatial frequency of the quadratic-phase
    kernel over the two apertures."""
    return lam * R / (2.0 * (in_half + out_half))


def check_sampling(in_grid: GridSpec, out_grid: GridSpec, lam: float, R: float) -> None:
    req_x = required_spacing(lam, R, in_grid.half_width_x, out_grid.half_width_x)
    req_y = required_spacing(lam, R, in_grid.half_width_y, out_grid.half_width_y)
    if in_grid.dx > req_x * (1 + 1e-9) or in_grid.dy > req_y * (1 + 1e-9):
        raise AliasingError(
            f"input spacing ({in_grid.dx:g}, {in_grid.dy:g}) m aliases the "
            f"propagation kernel; required <= ({req_x:g}, {req_y:g}) m"
        )


# --- kernel quadratures -----------------------------------------------------

def _kernel_separable(samples, in_grid: GridSpec, out_grid: GridSpec,
                      k: float, R: float) -> np.ndarray:
    """out[a,b] = sum_ij s[i,j] exp(j (k/R)(x_i u_a + y_j v_b)) dx dy."""
    c = k / R
    ex = np.exp(1j * c * np.outer(out_grid.x, in_grid.x)) * in_grid.dx
    ey = np.exp(1j * c * np.outer(out_grid.y, in_grid.y)) * in_grid.dy
    return ex @ samples @ ey.T


def _kernel_direct(samples, in_grid: GridSpec, out_grid: GridSpec,
                   k: float, R: float, shear: ShearMatrix | None = None) -> np.ndarray:
    """Unfactored Riemann sum of the (possibly sheared) bilinear kernel.

    With a shear, the exponent is (k/R) [ (b11 x + b12 y) u + (b21 x + b22 y) v ].
    O(N^4); intended for cross-validation on small grids.
    """
    c = k / R
    x, y = in_grid.meshgrid()
    if shear is None:
        xs, ys = x, y
    else:
        xs = shear.b11 * x + shear.b12 * y
        ys = shear.b21 * x + shear.b22 * y
    w = samples * in_grid.cell_area
    out = np.empty((out_grid.nx, out_grid.ny), dtype=complex)
    ev = np.exp(1j * c * np.outer(ys.ravel(), out_grid.y))
    for a, u_a in enumerate(out_grid.x):
        row = (w * np.exp(1j * c * xs * u_a)).ravel()
        out[a, :] = row @ ev
    return out


def sheared_grid(in_grid: GridSpec, shear: ShearMatrix, out_grid: GridSpec,
                 lam: float, R: float) -> GridSpec:
    """Grid for the sheared copy of the input: bounding box of the input
    aperture image under the shear, sampled finely enough for the
    anti-aliasing rule against the given output grid."""
    hx, hy = in_grid.extent_x / 2, in_grid.extent_y / 2
    corners = np.array(
        [[in_grid.cx + sx * hx, in_grid.cy + sy * hy]
         for sx in (-1, 1) for sy in (-1, 1)]
    )
    img = corners @ shear.matrix.T
    lo, hi = img.min(axis=0), img.max(axis=0)
    cx, cy = (lo + hi) / 2
    ext_x, ext_y = hi - lo
    half_x = max(abs(lo[0]), abs(hi[0]))
    half_y = max(abs(lo[1]), abs(hi[1]))
    req_x = required_spacing(lam, R, half_x, out_grid.half_width_x)
    req_y = required_spacing(lam, R, half_y, out_grid.half_width_y)
    nx = max(in_grid.nx, int(np.ceil(ext_x / req_x)) + 1)
    ny = max(in_grid.ny, int(np.ceil(ext_y / req_y)) + 1)
    return GridSpec(nx=nx, ny=ny, dx=ext_x / nx, dy=ext_y / ny, cx=cx, cy=cy)


# --- public operations ------------------------------------------------------

def propagate_signal(
    s_in: ComplexField,
    spec: PropagationSpec,
    out_grid: GridSpec,
    shear: ShearMatrix | None = None,
    shear_side: str = "input",
    stage_label: str = "",
) -> ComplexField:
    """One Fourier-kernel hop between signal variables.

    ``shear`` is the misalignment coupling matrix (None or identity for
    an aligned link).  ``shear_side`` selects where the coordinate
    change acts: "input" re-maps the transmit coordinates before the
    kernel (first leg of a link); "output" means the result is produced
    on already-sheared output coordinates and the kernel itself stays
    aligned (second leg, where the receiver unshears afterwards).
    """
    if spec.backend == "exact_kernel":
        raise MetalinkError("exact_kernel operates on fields, not signal variables")
    lam, R, k = spec.wavelength, spec.distance, spec.k
    pref = 1j * np.exp(-1j * k * R) / (lam * R)

    if shear is not None and not shear.is_identity:
        if shear.ill_conditioned:
            raise ConditioningError(
                f"shear matrix determinant {shear.det:g} below conditioning floor"
            )
        if shear_side == "input":
            amp = pref * spec.obliquity / np.sqrt(shear.det)
            if spec.backend == "direct_quadrature":
                check_sampling(s_in.grid, out_grid, lam, R)
                raw = _kernel_direct(s_in.samples, s_in.grid, out_grid, k, R, shear)
                # direct path keeps the obliquity but not the resample factor
                return ComplexField(out_grid, pref * spec.obliquity * raw, stage_label)
            mid = sheared_grid(s_in.grid, shear, out_grid, lam, R)
            sp = resample_affine(s_in, shear.matrix, 1.0 / np.sqrt(shear.det), mid)
            check_sampling(mid, out_grid, lam, R)
            raw = _kernel_separable(sp.samples, mid, out_grid, k, R)
            return ComplexField(out_grid, amp * raw, stage_label)
        if shear_side == "output":
            # out_grid carries the sheared coordinates; kernel is aligned
            check_sampling(s_in.grid, out_grid, lam, R)
            amp = pref * spec.obliquity / np.sqrt(shear.det)
            if spec.backend == "direct_quadrature":
                raw = _kernel_direct(s_in.samples, s_in.grid, out_grid, k, R)
            else:
                raw = _kernel_separable(s_in.samples, s_in.grid, out_grid, k, R)
            return ComplexField(out_grid, amp * raw, stage_label)
        raise ValueError(f"shear_side must be 'input' or 'output', got {shear_side!r}")

    check_sampling(s_in.grid, out_grid, lam, R)
    if spec.backend == "direct_quadrature":
        raw = _kernel_direct(s_in.samples, s_in.grid, out_grid, k, R)
    else:
        raw = _kernel_separable(s_in.samples, s_in.grid, out_grid, k, R)
    return ComplexField(out_grid, pref * spec.obliquity * raw, stage_label)


def propagate_field(
    f_in: ComplexField,
    spec: PropagationSpec,
    out_grid: GridSpec,
    stage_label: str = "",
) -> ComplexField:
    """One hop between physical fields.

    Fresnel backends factor the quadratic-phase kernel into an input
    mask, the (possibly sheared) Fourier kernel, and an output mask;
    the masks are exactly the conjugated surface phase profiles.  The
    ``exact_kernel`` backend instead sums the spherical wavelet
    exp(-jk d)/d with the true 3-D distance (no obliquity factor).
    """
    lam, R, k = spec.wavelength, spec.distance, spec.k
    if spec.backend == "exact_kernel":
        if not spec.cosines.is_aligned:
            raise MetalinkError("exact_kernel backend supports aligned frames only")
        if f_in.grid.nx * f_in.grid.ny > EXACT_KERNEL_MAX_NODES or \
                out_grid.nx * out_grid.ny > EXACT_KERNEL_MAX_NODES:
            raise MetalinkError(
                f"exact_kernel limited to {EXACT_KERNEL_MAX_NODES} nodes per grid"
            )
        x, y = f_in.grid.meshgrid()
        w = f_in.samples * f_in.grid.cell_area
        out = np.empty((out_grid.nx, out_grid.ny), dtype=complex)
        for a, u_a in enumerate(out_grid.x):
            d = np.sqrt(
                (x[:, :, None] - u_a) ** 2
                + (y[:, :, None] - out_grid.y[None, None, :]) ** 2
                + R**2
            )
            out[a, :] = np.sum(w[:, :, None] * np.exp(-1j * k * d) / d, axis=(0, 1))
        return ComplexField(out_grid, (1j / lam) * out, stage_label)

    if not spec.fresnel_valid(f_in.grid, out_grid):
        ratio = spec.fresnel_aperture_ratio(f_in.grid, out_grid)
        raise MetalinkError(
            f"paraxial validity violated: aperture/distance ratio {ratio:.3g} "
            f"> {FRESNEL_MAX_APERTURE_RATIO}"
        )

    cos = spec.cosines
    theta_in = phase_two_surface("tx", cos, k, R, f_in.grid)
    theta_out = phase_two_surface("rx", cos, k, R, out_grid)
    masked = ComplexField(f_in.grid, f_in.samples * np.exp(-1j * theta_in.theta))
    if cos.is_aligned:
        inner = propagate_signal(masked, spec, out_grid)
    else:
        inner = propagate_signal(masked, spec, out_grid, shear=shear_matrix(cos))
    return ComplexField(out_grid, inner.samples * np.exp(-1j * theta_out.theta),
                        stage_label)


def roundtrip_double_ft(
    s1: ComplexField,
    R1: float,
    R2: float,
    wavelength: float,
    mid_grid: GridSpec,
    out_grid: GridSpec,
    backend: str = "separable_sheared_dft",
) -> ComplexField:
    """Two aligned hops; the output approximates the inverted, rescaled
    source -(R1/R2) S1(-(R1/R2) u, -(R1/R2) v) up to a constant phase."""
    mid = propagate_signal(
        s1, PropagationSpec.aligned(wavelength, R1, backend), mid_grid
    )
    return propagate_signal(
        mid, PropagationSpec.aligned(wavelength, R2, backend), out_grid
    )
