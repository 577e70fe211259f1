"""Composition rules turning one phi-uniformity modulus into another.

Every rule takes moduli (increasing functions with ``phi(0) = 0``) and
parameters and returns a :class:`Modulus`.  Input moduli are checked on a
grid before composing, and so are the outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import OutOfRange
from .constants import a_alpha_theta, a_theta

TRANSFER_KINDS = (
    "bilipschitz",
    "inversion",
    "puncture",
    "multi_puncture",
    "uniform_removal",
    "removal_set",
    "phi_to_omega",
)

PI_OVER_LOG3 = math.pi / math.log(3.0)
CHECK_GRID = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 99)])
# omega(t) = phi(e^t - 1) overflows long before t = 1e6
OMEGA_GRID = np.concatenate([[0.0], np.geomspace(1e-6, 50.0, 99)])


@dataclass(frozen=True)
class Modulus:
    """A vectorized increasing function with ``phi(0) = 0``.

    ``constant`` is set for rules that produce a uniformity constant ``C``;
    the modulus is then ``C log(1 + t)``, i.e. ``k <= C j``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    formula: str
    constant: float | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        out = self.fn(np.asarray(t, dtype=float))
        return float(out) if np.ndim(out) == 0 else out


def linear(c: float = 1.0) -> Modulus:
    """``t -> c t``; convex domains have ``c = 1``."""
    return Modulus(lambda t: c * t, f"{c!r}*t", params={"c": c})


def log_modulus(c: float = 1.0) -> Modulus:
    """``t -> c log(1 + t)``, the modulus of a ``c``-uniform domain."""
    return Modulus(lambda t: c * np.log1p(t), f"{c!r}*log(1+t)", constant=c, params={"c": c})


def as_modulus(phi, label: str = "phi") -> Modulus:
    if isinstance(phi, Modulus):
        return phi
    if not callable(phi):
        raise OutOfRange(f"{label} must be callable")
    return Modulus(lambda t: np.asarray(phi(t), dtype=float), label)


def check_modulus(phi: Modulus, label: str = "phi", grid=CHECK_GRID) -> None:
    """Raise :class:`OutOfRange` unless ``phi(0) = 0`` and ``phi`` is strictly increasing on ``grid``."""
    v = np.asarray(phi(grid), dtype=float)
    if v.shape != grid.shape or not np.all(np.isfinite(v)):
        raise OutOfRange(f"{label} must be finite on [0, 1e6]")
    if abs(v[0]) > 0.0:
        raise OutOfRange(f"{label}(0) must be 0, got {v[0]!r}")
    if not np.all(np.diff(v) > 0):
        raise OutOfRange(f"{label} must be strictly increasing")


def _positive(name, v):
    v = float(v)
    if not (v > 0) or math.isinf(v):
        raise OutOfRange(f"{name} must be positive and finite")
    return v


def _count(name, v):
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise OutOfRange(f"{name} must be an integer >= 1")
    return int(v)


def phi2_modulus() -> Modulus:
    """``(pi / log 3) log(1 + t)``, the modulus of a punctured space."""
    return log_modulus(PI_OVER_LOG3)


def phi_transfer(kind: str, **inputs) -> Modulus:
    """Compose a modulus according to ``kind``.

    ========================  ===============================================  ==========================
    kind                      inputs                                           result
    ========================  ===============================================  ==========================
    ``bilipschitz``           ``L >= 1``, ``phi``                              ``L^2 phi(L^2 t)``
    ``inversion``             ``m < M``, ``phi``                               ``(M/m)^2 phi(M^2 t / m^2)``
    ``puncture``              ``theta``, ``phi1``                              ``2 max(phi2(3t), a(theta/2) phi1(3t))``
    ``multi_puncture``        ``m``, ``theta``, ``phi0``                       ``2^m a^(m-1) max(phi2(3t), a phi0(3t))``
    ``uniform_removal``       ``m``, ``theta``, ``c >= 1``                     ``C log(1+t)``, ``C = 6^m a^m c``
    ``removal_set``           ``theta``, ``phi1``, ``phi2``                    ``4 a(1/4, theta/3) max(phi1(30t), phi2(30t))``
    ``phi_to_omega``          ``phi``                                          ``phi(e^t - 1)``
    ========================  ===============================================  ==========================

    Here ``phi2(t) = (pi / log 3) log(1 + t)`` and ``a = a(theta/2)``.
    """
    if kind not in TRANSFER_KINDS:
        raise OutOfRange(f"unknown transfer kind '{kind}'; expected one of {TRANSFER_KINDS}")

    def _mod(key):
        if key not in inputs:
            raise OutOfRange(f"'{kind}' needs the modulus '{key}'")
        m = as_modulus(inputs[key], key)
        check_modulus(m, key)
        return m

    def _theta():
        t = float(inputs.get("theta", math.nan))
        if not (0.0 < t < 1.0):
            raise OutOfRange("theta must lie in (0, 1)")
        return t

    if kind == "bilipschitz":
        L = float(inputs.get("L", math.nan))
        if not (L >= 1.0) or math.isinf(L):
            raise OutOfRange("bilipschitz constant L must be >= 1")
        phi = _mod("phi")
        L2 = L * L
        out = Modulus(lambda t: L2 * phi.fn(L2 * t), f"{L2!r}*phi({L2!r}*t)", params={"L": L})
    elif kind == "inversion":
        m = _positive("m", inputs.get("m", math.nan))
        M = _positive("M", inputs.get("M", math.nan))
        if not m < M:
            raise OutOfRange("inversion needs 0 < m < M")
        phi = _mod("phi")
        q = (M / m) ** 2
        out = Modulus(lambda t: q * phi.fn(q * t), f"{q!r}*phi({q!r}*t)", params={"m": m, "M": M})
    elif kind == "puncture":
        theta = _theta()
        phi1 = _mod("phi1")
        a = a_theta(theta / 2.0)
        out = Modulus(
            lambda t: 2.0 * np.maximum(PI_OVER_LOG3 * np.log1p(3.0 * t), a * phi1.fn(3.0 * t)),
            f"2*max(pi/log(3)*log(1+3t), {a!r}*phi1(3t))",
            params={"theta": theta, "a": a},
        )
    elif kind == "multi_puncture":
        theta = _theta()
        m = _count("m", inputs.get("m", math.nan))
        phi0 = _mod("phi0")
        a = a_theta(theta / 2.0)
        c = 2.0 ** m * a ** (m - 1)
        out = Modulus(
            lambda t: c * np.maximum(PI_OVER_LOG3 * np.log1p(3.0 * t), a * phi0.fn(3.0 * t)),
            f"{c!r}*max(pi/log(3)*log(1+3t), {a!r}*phi0(3t))",
            params={"theta": theta, "m": m, "a": a},
        )
    elif kind == "uniform_removal":
        theta = _theta()
        m = _count("m", inputs.get("m", math.nan))
        c = float(inputs.get("c", math.nan))
        if not (c >= 1.0) or math.isinf(c):
            raise OutOfRange("uniformity constant c must be >= 1")
        C = 6.0 ** m * a_theta(theta / 2.0) ** m * c
        out = log_modulus(C)
        out = Modulus(out.fn, out.formula, constant=C, params={"theta": theta, "m": m, "c": c})
    elif kind == "removal_set":
        theta = _theta()
        phi1 = _mod("phi1")
        phi2 = _mod("phi2")
        a = a_alpha_theta(0.25, theta / 3.0)
        out = Modulus(
            lambda t: 4.0 * a * np.maximum(phi1.fn(30.0 * t), phi2.fn(30.0 * t)),
            f"{4.0 * a!r}*max(phi1(30t), phi2(30t))",
            params={"theta": theta, "a": a},
        )
    else:
        phi = _mod("phi")
        out = Modulus(lambda t: phi.fn(np.expm1(t)), "phi(exp(t)-1)")
        check_modulus(out, kind, OMEGA_GRID)
        return out
    check_modulus(out, kind)
    return out
