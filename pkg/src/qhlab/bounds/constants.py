"""Constants appearing in the point- and set-removal estimates."""

from __future__ import annotations

import math

from ..errors import OutOfRange


def _unit_open(name, v):
    v = float(v)
    if not (0.0 < v < 1.0):
        raise OutOfRange(f"{name} must lie in (0, 1), got {v!r}")
    return v


def a_theta(theta: float) -> float:
    """``1 + 2/theta + pi / (2 log((2 + 2 theta) / (2 + theta)))``.

    The constant by which removing a point ``z`` can stretch quasihyperbolic
    distances between points outside ``B(z, theta * delta(z))``.
    """
    t = _unit_open("theta", theta)
    # (2 + 2t) / (2 + t) = 1 + t / (2 + t)
    return 1.0 + 2.0 / t + math.pi / (2.0 * math.log1p(t / (2.0 + t)))


def a_alpha_theta(alpha: float, theta: float) -> float:
    """Constant for removing the closed ball ``B(z, alpha * theta * delta(z))``.

    ``(2 + t + a t) / (t (1 - a^2)) + (1 + a) pi / (2 (1 - a) log((2 + 2t) / (2 + t + a t)))``
    with ``a = alpha`` and ``t = theta``; tends to :func:`a_theta` as ``alpha -> 0``.
    """
    a = _unit_open("alpha", alpha)
    t = _unit_open("theta", theta)
    first = (2.0 + t + a * t) / (t * (1.0 - a) * (1.0 + a))
    # (2 + 2t) / (2 + t + a t) = 1 + t (1 - a) / (2 + t + a t)
    log_term = math.log1p(t * (1.0 - a) / (2.0 + t + a * t))
    return first + (1.0 + a) * math.pi / (2.0 * (1.0 - a) * log_term)


def jung_radius(n: int, diam: float) -> float:
    """Radius ``sqrt(n / (2n + 2)) * diam`` of a ball containing any set of diameter ``diam`` in R^n."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise OutOfRange(f"dimension must be an integer >= 2, got {n!r}")
    diam = float(diam)
    if not (diam > 0.0) or math.isinf(diam):
        raise OutOfRange(f"diameter must be positive and finite, got {diam!r}")
    n = int(n)
    return math.sqrt(n / (2.0 * n + 2.0)) * diam
