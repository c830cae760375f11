"""Speed-curvature-torsion power-law analysis of sampled 3D movements."""

__version__ = "0.1.0"

from .diffgeo import (  # noqa: E402
    DerivativeStack,
    KinematicProfile,
    curvature,
    differentiate,
    kinematic_profile,
    speed,
    torsion,
)
from .filtering import Biquad, FilterSpec, design_lowpass, pchip_resample, zero_lag_filter  # noqa: E402
from .powerlaw import MaskReport, PowerLawFit, fit, mask, predict_speed  # noqa: E402
from .synth import GenSpec, PathSpec, analytic_geometry, generate  # noqa: E402
from .trajectory import Sample, SegmentSlice, Trajectory, split_segments, validate  # noqa: E402

__all__ = [
    "Biquad", "DerivativeStack", "FilterSpec", "GenSpec", "KinematicProfile", "MaskReport",
    "PathSpec", "PowerLawFit", "Sample", "SegmentSlice", "Trajectory", "analytic_geometry",
    "curvature", "design_lowpass", "differentiate", "fit", "generate", "kinematic_profile",
    "mask", "pchip_resample", "predict_speed", "speed", "split_segments", "torsion",
    "validate", "zero_lag_filter",
]
