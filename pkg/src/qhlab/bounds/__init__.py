"""Catalogued inequalities, constants and modulus transfer rules."""

from .catalog import BoundSpec, Part, catalog, closed_bounds, get_bound
from .check import ViolationReport, check_bound, sharpness_defect
from .constants import a_alpha_theta, a_theta, jung_radius
from .transfer import TRANSFER_KINDS, Modulus, linear, log_modulus, phi2_modulus, phi_transfer

__all__ = [
    "BoundSpec",
    "Modulus",
    "Part",
    "TRANSFER_KINDS",
    "ViolationReport",
    "a_alpha_theta",
    "a_theta",
    "catalog",
    "check_bound",
    "closed_bounds",
    "get_bound",
    "jung_radius",
    "linear",
    "log_modulus",
    "phi2_modulus",
    "phi_transfer",
    "sharpness_defect",
]
