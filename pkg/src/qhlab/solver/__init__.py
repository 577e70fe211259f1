"""Numeric quasihyperbolic distances, geodesics and their building blocks."""

from .core import (
    DEFAULT_CONFIG,
    GeodesicPath,
    SolverConfig,
    additivity_check,
    geodesic,
    k_distance,
    polyline_costs,
    segment_k_length,
)
from .mesh import MeshGraph, build_mesh

__all__ = [
    "DEFAULT_CONFIG",
    "GeodesicPath",
    "MeshGraph",
    "SolverConfig",
    "additivity_check",
    "build_mesh",
    "geodesic",
    "k_distance",
    "polyline_costs",
    "segment_k_length",
]
