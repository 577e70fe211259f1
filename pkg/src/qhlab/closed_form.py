"""Exact metric formulas.

All functions accept single points (1-D arrays) and return a
:class:`MetricResult`; the ``*_batch`` variants take ``(N, n)`` arrays and
return plain value arrays for vectorized sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CenterSingularity,
    DimensionMismatch,
    NoClosedForm,
    NotOnNearestBoundarySegment,
    NotRadialConfiguration,
    OutOfRange,
    PointOutsideDomain,
)
from .geometry.domains import DomainOracle

COLLINEAR_TOL = 1e-9


@dataclass
class MetricResult:
    """A metric value with its provenance.

    ``lower`` is a certified lower bound (equal to ``value`` for closed forms;
    the distance ratio metric for numeric quasihyperbolic values).
    """

    value: float
    method: str = "closed_form"
    error_bound: float = 0.0
    lower: float | None = None
    converged: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.value = float(self.value)
        self.error_bound = float(self.error_bound)
        if self.lower is None:
            self.lower = self.value if self.method == "closed_form" else 0.0

    def __float__(self) -> float:
        return self.value


def _pt(x, n=None) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1 or a.shape[0] < 2:
        raise DimensionMismatch(f"expected a point with at least 2 coordinates, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DimensionMismatch(f"expected dimension {n}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    return a


def _pair(x, y, n=None):
    x = _pt(x, n)
    y = _pt(y, x.shape[0])
    return x, y


def _dist(X, Y):
    D = X - Y
    return np.sqrt(np.einsum("...i,...i->...", D, D))


# --- distance ratio metric -------------------------------------------------

def j_from_deltas(dist, dx, dy):
    """``log(1 + |x-y| / min(delta(x), delta(y)))``, vectorized."""
    return np.log1p(np.asarray(dist) / np.minimum(dx, dy))


def j_batch(oracle: DomainOracle, X, Y) -> np.ndarray:
    dx = oracle.delta_batch(X)
    dy = oracle.delta_batch(Y)
    if np.any(dx <= 0) or np.any(dy <= 0):
        raise PointOutsideDomain("all points must lie in the domain")
    return j_from_deltas(_dist(np.asarray(X, float), np.asarray(Y, float)), dx, dy)


def j_metric(oracle: DomainOracle, x, y) -> MetricResult:
    x, y = _pair(x, y, oracle.dimension)
    dx, dy = oracle.delta(x), oracle.delta(y)
    if dx <= 0 or dy <= 0:
        raise PointOutsideDomain("both points must lie in the domain")
    return MetricResult(float(j_from_deltas(_dist(x, y), dx, dy)))


# --- hyperbolic metrics ------------------------------------------------------

def rho_ball_batch(X, Y) -> np.ndarray:
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    nx = np.einsum("...i,...i->...", X, X)
    ny = np.einsum("...i,...i->...", Y, Y)
    if np.any(nx >= 1.0) or np.any(ny >= 1.0):
        raise PointOutsideDomain("points must lie in the open unit ball")
    # (1 - |x|^2) without cancellation for |x| near 1
    t = np.sqrt((1.0 - nx) * (1.0 - ny))
    return 2.0 * np.arcsinh(_dist(X, Y) / t)


def rho_ball(x, y) -> MetricResult:
    """Hyperbolic distance in the unit ball: ``sinh(rho/2) = |x-y| / t``."""
    x, y = _pair(x, y)
    return MetricResult(float(rho_ball_batch(x, y)))


def rho_halfspace_batch(X, Y) -> np.ndarray:
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    xn, yn = X[..., -1], Y[..., -1]
    if np.any(xn <= 0) or np.any(yn <= 0):
        raise PointOutsideDomain("points must lie in the upper half-space")
    # cosh(rho) = 1 + |x-y|^2 / (2 x_n y_n)  <=>  sinh(rho/2) = |x-y| / (2 sqrt(x_n y_n))
    return 2.0 * np.arcsinh(_dist(X, Y) / (2.0 * np.sqrt(xn * yn)))


def k_halfspace(x, y) -> MetricResult:
    """Quasihyperbolic (= hyperbolic) distance of ``{x_n > 0}``."""
    x, y = _pair(x, y)
    return MetricResult(float(rho_halfspace_batch(x, y)))


# --- chordal metric ----------------------------------------------------------

def chordal_batch(X, Y) -> np.ndarray:
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    nx = np.einsum("...i,...i->...", X, X)
    ny = np.einsum("...i,...i->...", Y, Y)
    return _dist(X, Y) / (np.sqrt(1.0 + nx) * np.sqrt(1.0 + ny))


def chordal(x, y) -> MetricResult:
    """Spherical chordal distance; either point may be ``math.inf`` (the point at infinity)."""
    x_inf = np.isscalar(x) and math.isinf(x)
    y_inf = np.isscalar(y) and math.isinf(y)
    if x_inf and y_inf:
        return MetricResult(0.0, info={"infinity": True})
    if x_inf or y_inf:
        p = _pt(y if x_inf else x)
        return MetricResult(1.0 / math.sqrt(1.0 + float(p @ p)), info={"infinity": True})
    x, y = _pair(x, y)
    return MetricResult(float(chordal_batch(x, y)))


# --- quasihyperbolic closed forms ----------------------------------------------

def _radial_value(x, y, tol=COLLINEAR_TOL):
    """Value for the unit ball, or None when x, y, 0 are not collinear."""
    r, s = math.hypot(*x), math.hypot(*y)
    if r >= 1.0 or s >= 1.0:
        raise PointOutsideDomain("points must lie in the open unit ball")
    if r == 0.0 or s == 0.0:
        return float(-math.log1p(-r) - math.log1p(-s))
    # unit directions avoid underflow in the dot product of tiny vectors
    c = float((x / r) @ (y / s))
    if abs(c + 1.0) <= tol:
        return float(-math.log1p(-r) - math.log1p(-s))
    if abs(c - 1.0) <= tol:
        return abs(math.log1p(-r) - math.log1p(-s))
    return None


def k_radial_ball(x, y) -> MetricResult:
    """Quasihyperbolic distance in the unit ball for points on a common diameter."""
    x, y = _pair(x, y)
    v = _radial_value(x, y)
    if v is None:
        raise NotRadialConfiguration("x, y and the origin are not collinear")
    return MetricResult(v)


def k_segment_to_boundary(oracle: DomainOracle, z0, u, v, tol=COLLINEAR_TOL) -> MetricResult:
    """``|log(delta(u)/delta(v))|`` for ``u, v`` on a segment from ``z0`` to a nearest boundary point.

    Membership is tested through the distance function: ``w`` lies on such a
    segment exactly when ``delta(z0) - delta(w) = |z0 - w|``, and ``u, v`` lie
    on a common one when additionally ``|delta(u) - delta(v)| = |u - v|``.
    """
    z0 = _pt(z0, oracle.dimension)
    u = _pt(u, oracle.dimension)
    v = _pt(v, oracle.dimension)
    d0, du, dv = oracle.delta(z0), oracle.delta(u), oracle.delta(v)
    if min(d0, du, dv) <= 0:
        raise PointOutsideDomain("z0, u and v must lie in the domain")
    scale = max(1.0, d0)
    checks = (
        abs(d0 - du - _dist(z0, u)),
        abs(d0 - dv - _dist(z0, v)),
        abs(abs(du - dv) - _dist(u, v)),
    )
    if max(checks) > tol * scale:
        raise NotOnNearestBoundarySegment("u and v are not on a segment from z0 to a nearest boundary point")
    return MetricResult(abs(math.log(du / dv)))


def closed_form_k(oracle: DomainOracle, x, y) -> MetricResult:
    """Exact quasihyperbolic distance when some closed form applies.

    Covered: the half-space, balls along a diameter, and any pair lying on a
    segment towards a nearest boundary point of one of them.  Raises
    :class:`NoClosedForm` otherwise.
    """
    x, y = _pair(x, y, oracle.dimension)
    dx, dy = oracle.delta(x), oracle.delta(y)
    if dx <= 0 or dy <= 0:
        raise PointOutsideDomain("both points must lie in the domain")
    if np.array_equal(x, y):
        return MetricResult(0.0, info={"formula": "identity"})
    if oracle.kind == "half_space":
        return MetricResult(float(rho_halfspace_batch(x, y)), info={"formula": "half_space"})
    if oracle.kind == "ball":
        c, R = oracle.shape.center, oracle.shape.radius
        v = _radial_value((x - c) / R, (y - c) / R)
        if v is not None:
            return MetricResult(v, info={"formula": "radial_ball"})
    d = _dist(x, y)
    if abs(abs(dx - dy) - d) <= COLLINEAR_TOL * max(1.0, dx, dy):
        return MetricResult(abs(math.log(dx / dy)), info={"formula": "nearest_boundary_segment"})
    raise NoClosedForm(f"no closed form for this pair in a '{oracle.kind}' domain")


def closed_form_k_batch(oracle: DomainOracle, X, Y):
    """Vectorized :func:`closed_form_k`: returns ``(values, mask)``; values are NaN where ``~mask``."""
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    dx = oracle.delta_batch(X)
    dy = oracle.delta_batch(Y)
    d = _dist(X, Y)
    out = np.full(X.shape[0], np.nan)
    seg = np.abs(np.abs(dx - dy) - d) <= COLLINEAR_TOL * np.maximum(1.0, np.maximum(dx, dy))
    with np.errstate(divide="ignore", invalid="ignore"):
        out[seg] = np.abs(np.log(dx[seg] / dy[seg]))
    if oracle.kind == "half_space":
        return rho_halfspace_batch(X, Y), np.ones(X.shape[0], dtype=bool)
    if oracle.kind == "ball":
        c, R = oracle.shape.center, oracle.shape.radius
        U, V = (X - c) / R, (Y - c) / R
        r = np.linalg.norm(U, axis=1)
        s = np.linalg.norm(V, axis=1)
        dot = np.einsum("ij,ij->i", U, V)
        rs = r * s
        through = (rs == 0) | ((dot < 0) & (np.abs(dot + rs) <= COLLINEAR_TOL * rs))
        same = ~through & (dot > 0) & (np.abs(dot - rs) <= COLLINEAR_TOL * rs)
        out[through] = -np.log1p(-r[through]) - np.log1p(-s[through])
        out[same] = np.abs(np.log1p(-r[same]) - np.log1p(-s[same]))
    return out, ~np.isnan(out)


# --- maps and bound functions ------------------------------------------------

def inversion_map(a, r, x):
    """Inversion in the sphere ``S(a, r)``: ``a + r^2 (x - a) / |x - a|^2``.

    ``x`` may be a single point or an ``(N, n)`` array.
    """
    a = np.asarray(a, float)
    x = np.asarray(x, float)
    if r <= 0:
        raise OutOfRange("inversion radius must be positive")
    D = x - a
    nn = np.einsum("...i,...i->...", D, D)
    if np.any(nn == 0):
        raise CenterSingularity("the inversion center has no image")
    return a + (r * r) * D / nn[..., None]


MODULUS_KINDS = ("euclid_from_k", "euclid_from_j", "chordal_from_euclid")


def modulus_bounds(kind: str, t, r: float = 1.0):
    """Sharp modulus-of-continuity bound functions, vectorized in ``t``.

    * ``euclid_from_k``: ``2 r (1 - exp(-t/2))``
    * ``euclid_from_j``: ``2 r tanh(t/2)``
    * ``chordal_from_euclid``: ``t / (1 + (t/2)^2)`` for ``0 <= t < 2``
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise OutOfRange("t must be nonnegative")
    if kind == "euclid_from_k":
        out = -2.0 * r * np.expm1(-t_arr / 2.0)
    elif kind == "euclid_from_j":
        out = 2.0 * r * np.tanh(t_arr / 2.0)
    elif kind == "chordal_from_euclid":
        if np.any(t_arr >= 2.0):
            raise OutOfRange("the chordal bound holds only for t < 2")
        out = t_arr / (1.0 + (t_arr / 2.0) ** 2)
    else:
        raise ValueError(f"unknown modulus kind '{kind}'; expected one of {MODULUS_KINDS}")
    return float(out) if np.ndim(out) == 0 else out
