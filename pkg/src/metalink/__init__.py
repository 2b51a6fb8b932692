"""Simulation and analysis of metasurface line-of-sight links.

Subpackage map:

* ``geometry``     surface frames, direction cosines, shear matrices
* ``field``        sampled complex fields, source signals, resampling
* ``metasurface``  surface phase-shift profiles
* ``propagate``    Fourier-kernel and exact spherical-wave hops
* ``analytics``    mode counts, power ratios, normalized coordinates
* ``oracle``       closed-form rect/Gaussian references
* ``scenario``     INI-driven pipelines with CSV/summary export
* ``gridio``       CSV grid format
* ``cli``          ``metalink`` command-line entry point
"""

from .errors import (
    AliasingError,
    ConditioningError,
    ConfigError,
    FrameValidationError,
    GridMismatchError,
    MetalinkError,
    ResolutionError,
)

__all__ = [
    "MetalinkError",
    "FrameValidationError",
    "GridMismatchError",
    "ResolutionError",
    "AliasingError",
    "ConditioningError",
    "ConfigError",
]

__version__ = "0.1.0"
