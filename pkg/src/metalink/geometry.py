"""3-D surface frames, direction cosines, and misalignment shear matrices.

A link is described by two planar surfaces, each with an orthonormal
in-plane basis and outward normal, plus the unit axis joining their
centers.  All pairwise dot products between the axis and the two bases
determine both the obliquity of the link and the 2x2 shear matrix that
couples transmit and receive in-plane coordinates.  For orthonormal
frames the absolute determinant of the shear matrix always equals the
product of the two axis-normal cosines; ``verify_det_identity`` checks
this numerically for any frame pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FrameValidationError

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12
#: below this determinant the inverse shear map is considered ill-conditioned
DET_CONDITIONING_FLOOR = 1e-6


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise FrameValidationError(f"expected a 3-vector, got shape {a.shape}")
    return a


def require_unit(v, name: str) -> np.ndarray:
    a = _as_vec3(v)
    n = np.linalg.norm(a)
    if abs(n - 1.0) >= UNIT_TOL:
        raise FrameValidationError(f"{name} is not unit length: |v| = {n!r}")
    return a


@dataclass(frozen=True)
class SurfaceFrame:
    """Origin plus orthonormal in-plane axes and normal of one surface.

    The frame must be right-handed: ``normal == axis_a x axis_b``.
    Left-handed inputs are rejected rather than silently reoriented.
    """

    axis_a: np.ndarray
    axis_b: np.ndarray
    normal: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        a = require_unit(self.axis_a, "axis_a")
        b = require_unit(self.axis_b, "axis_b")
        n = require_unit(self.normal, "normal")
        object.__setattr__(self, "axis_a", a)
        object.__setattr__(self, "axis_b", b)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "origin", _as_vec3(self.origin))
        dot_ab = float(np.dot(a, b))
        if abs(dot_ab) >= ORTHO_TOL:
            raise FrameValidationError(
                f"in-plane axes are not orthogonal: axis_a . axis_b = {dot_ab!r}"
            )
        cross = np.cross(a, b)
        if np.max(np.abs(cross - n)) >= 1e-10:
            if np.max(np.abs(cross + n)) < 1e-10:
                raise FrameValidationError(
                    "left-handed frame: normal = -(axis_a x axis_b)"
                )
            raise FrameValidationError(
                "normal is not axis_a x axis_b within tolerance"
            )

    @classmethod
    def canonical(cls, origin=(0.0, 0.0, 0.0)) -> "SurfaceFrame":
        """Axis-aligned frame: in-plane (x, y), normal +z."""
        return cls(
            axis_a=np.array([1.0, 0.0, 0.0]),
            axis_b=np.array([0.0, 1.0, 0.0]),
            normal=np.array([0.0, 0.0, 1.0]),
            origin=np.asarray(origin, dtype=float),
        )


@dataclass(frozen=True)
class LinkAxis:
    """Unit direction joining two surface centers, plus the center distance."""

    direction: np.ndarray
    distance: float

    def __post_init__(self):
        object.__setattr__(
            self, "direction", require_unit(self.direction, "axis direction")
        )
        if not self.distance > 0:
            raise FrameValidationError(
                f"axis distance must be positive, got {self.distance!r}"
            )

    @classmethod
    def canonical(cls, distance: float) -> "LinkAxis":
        return cls(direction=np.array([0.0, 0.0, 1.0]), distance=float(distance))


@dataclass(frozen=True)
class DirectionCosines:
    """All pairwise dot products needed by the shear matrix and phase masks.

    The transmit in-plane axes are called (x, y) with normal z; the
    receive in-plane axes (u, v) with normal w; r is the link axis.
    """

    a_rx: float
    a_ry: float
    a_rz: float
    a_ru: float
    a_rv: float
    a_rw: float
    a_xu: float
    a_yu: float
    a_xv: float
    a_yv: float

    @classmethod
    def aligned(cls) -> "DirectionCosines":
        return cls(
            a_rx=0.0, a_ry=0.0, a_rz=1.0,
            a_ru=0.0, a_rv=0.0, a_rw=1.0,
            a_xu=1.0, a_yu=0.0, a_xv=0.0, a_yv=1.0,
        )

    @property
    def obliquity(self) -> float:
        """Signed tilt factor a_rz * a_rw carried by the propagation kernel."""
        return self.a_rz * self.a_rw

    @property
    def is_aligned(self) -> bool:
        return (
            abs(self.a_rx) < UNIT_TOL
            and abs(self.a_ry) < UNIT_TOL
            and abs(self.a_ru) < UNIT_TOL
            and abs(self.a_rv) < UNIT_TOL
        )


def direction_cosines(
    tx_frame: SurfaceFrame, rx_frame: SurfaceFrame, axis: LinkAxis
) -> DirectionCosines:
    """Dot products of the link axis and both frame bases.

    Raises FrameValidationError if any basis fails its orthonormality
    invariant (checked by the frame constructors, re-checked here for
    callers that mutate arrays in place).
    """
    r = require_unit(axis.direction, "axis direction")
    for name, f in (("tx", tx_frame), ("rx", rx_frame)):
        ab = float(np.dot(f.axis_a, f.axis_b))
        if abs(ab) >= ORTHO_TOL:
            raise FrameValidationError(f"{name} frame axes not orthogonal: {ab!r}")
    x, y = tx_frame.axis_a, tx_frame.axis_b
    u, v = rx_frame.axis_a, rx_frame.axis_b
    return DirectionCosines(
        a_rx=float(r @ x), a_ry=float(r @ y), a_rz=float(r @ tx_frame.normal),
        a_ru=float(r @ u), a_rv=float(r @ v), a_rw=float(r @ rx_frame.normal),
        a_xu=float(x @ u), a_yu=float(y @ u),
        a_xv=float(x @ v), a_yv=float(y @ v),
    )


@dataclass(frozen=True)
class ShearMatrix:
    """2x2 coupling of transmit to receive in-plane coordinates.

    Row 1 maps onto the first receive coordinate, row 2 onto the
    second: (x', y') = T (x, y).  ``det`` is the absolute determinant,
    which equals the fraction of power (and of spatial modes) that
    survives the misalignment.
    """

    b11: float
    b12: float
    b21: float
    b22: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.b11, self.b12], [self.b21, self.b22]])

    @property
    def signed_det(self) -> float:
        return self.b11 * self.b22 - self.b12 * self.b21

    @property
    def det(self) -> float:
        return abs(self.signed_det)

    @property
    def ill_conditioned(self) -> bool:
        """True when the inverse map is numerically unreliable."""
        return self.det < DET_CONDITIONING_FLOOR

    @classmethod
    def identity(cls) -> "ShearMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def is_identity(self) -> bool:
        return (
            abs(self.b11 - 1.0) < UNIT_TOL
            and abs(self.b22 - 1.0) < UNIT_TOL
            and abs(self.b12) < UNIT_TOL
            and abs(self.b21) < UNIT_TOL
        )


def shear_matrix(cos: DirectionCosines) -> ShearMatrix:
    """Shear matrix of b-coefficients from the direction cosines.

    Each entry subtracts the projection along the link axis from the
    raw inter-frame cosine, e.g. b11 = a_xu - a_rx * a_ru.
    """
    return ShearMatrix(
        b11=cos.a_xu - cos.a_rx * cos.a_ru,
        b12=cos.a_yu - cos.a_ry * cos.a_ru,
        b21=cos.a_xv - cos.a_rx * cos.a_rv,
        b22=cos.a_yv - cos.a_ry * cos.a_rv,
    )


@dataclass(frozen=True)
class DetIdentityReport:
    det: float
    cos_product: float
    abs_diff: float


def verify_det_identity(
    tx_frame: SurfaceFrame, rx_frame: SurfaceFrame, axis: LinkAxis
) -> DetIdentityReport:
    """Compare |det T| against |a_rz * a_rw| for one frame pair.

    Returns the report regardless of the outcome; callers assert on
    ``abs_diff``.
    """
    cos = direction_cosines(tx_frame, rx_frame, axis)
    t = shear_matrix(cos)
    prod = abs(cos.a_rz * cos.a_rw)
    return DetIdentityReport(
        det=t.det, cos_product=prod, abs_diff=abs(t.det - prod)
    )


def random_frame(rng: np.random.Generator, origin=(0.0, 0.0, 0.0)) -> SurfaceFrame:
    """Right-handed orthonormal frame from Gram-Schmidt on random vectors."""
    while True:
        raw = rng.standard_normal((2, 3))
        a = raw[0] / np.linalg.norm(raw[0])
        b = raw[1] - (raw[1] @ a) * a
        nb = np.linalg.norm(b)
        if nb > 1e-6:
            b = b / nb
            break
    n = np.cross(a, b)
    # re-orthogonalize to push dot products below the 1e-12 gate
    b = np.cross(n, a)
    b /= np.linalg.norm(b)
    n = np.cross(a, b)
    n /= np.linalg.norm(n)
    return SurfaceFrame(axis_a=a, axis_b=b, normal=n,
                        origin=np.asarray(origin, dtype=float))


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n
