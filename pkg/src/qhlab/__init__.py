"""qhlab: quasihyperbolic and related metrics on Euclidean domains.

Domains are built from JSON-style specs (:func:`make_domain`); distances come
from closed forms where they exist and from a boundary-adapted graph solver
otherwise; inequalities between the metrics are checked on seeded samples
and phi-uniformity is profiled empirically.
"""

__version__ = "0.1.0"

from .bounds import (
    a_alpha_theta,
    a_theta,
    catalog,
    check_bound,
    get_bound,
    jung_radius,
    phi_transfer,
)
from .closed_form import (
    MetricResult,
    chordal,
    closed_form_k,
    inversion_map,
    j_metric,
    k_halfspace,
    k_radial_ball,
    k_segment_to_boundary,
    rho_ball,
)
from .geometry import DomainOracle, DomainSpec, make_domain, sample_pairs, sample_points
from .profiler import (
    divergence_sequence,
    envelope_vs_theorem,
    phi_envelope,
    uniformity_constant,
)
from .solver import SolverConfig, geodesic, k_distance

__all__ = [
    "DomainOracle",
    "DomainSpec",
    "MetricResult",
    "SolverConfig",
    "__version__",
    "a_alpha_theta",
    "a_theta",
    "catalog",
    "check_bound",
    "chordal",
    "closed_form_k",
    "divergence_sequence",
    "envelope_vs_theorem",
    "geodesic",
    "get_bound",
    "inversion_map",
    "j_metric",
    "jung_radius",
    "k_distance",
    "k_halfspace",
    "k_radial_ball",
    "k_segment_to_boundary",
    "make_domain",
    "phi_envelope",
    "phi_transfer",
    "rho_ball",
    "sample_pairs",
    "sample_points",
    "uniformity_constant",
]
