"""Finite-gap NLS solutions on hyperelliptic surfaces and a numerical check of their maximal amplitude."""
from .amplitude import AmplitudeContext, PhasePoint, build_context, f_value, psi_value
from .periods import PeriodData, compute_periods
from .surface import Mode, Surface, SurfaceSpec, defocusing_surface, focusing_surface, validate
from .theta import ThetaContext, theta

__all__ = [
    "AmplitudeContext", "PhasePoint", "build_context", "f_value", "psi_value",
    "PeriodData", "compute_periods",
    "Mode", "Surface", "SurfaceSpec", "defocusing_surface", "focusing_surface", "validate",
    "ThetaContext", "theta",
]
