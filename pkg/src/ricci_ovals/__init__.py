"""Numerical laboratory for rotationally symmetric ancient Ricci flow on S^3."""

from .kernels import BACKEND
from .states import CurvatureField, GaugeParams, ProfileState, RescaledState

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CurvatureField",
    "GaugeParams",
    "ProfileState",
    "RescaledState",
    "__version__",
]
