"""Exception types shared across the package."""


class MetalinkError(Exception):
    """Base class for all package errors."""


class FrameValidationError(MetalinkError):
    """A surface frame or link axis violates an orthonormality invariant."""


class GridMismatchError(MetalinkError):
    """Two sampled objects were combined but live on different grids."""


class ResolutionError(MetalinkError):
    """A signal is under-resolved on the requested grid."""


class AliasingError(MetalinkError):
    """Grid spacing violates the anti-aliasing rule for the propagation kernel."""


class ConditioningError(MetalinkError):
    """A coordinate map is too close to singular to invert reliably."""


class ConfigError(MetalinkError):
    """A scenario configuration is malformed or incomplete."""
