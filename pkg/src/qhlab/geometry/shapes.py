"""Vectorized boundary-distance and membership primitives.

Every shape works on point arrays of shape ``(N, n)`` and exposes

* ``boundary_distance(P)`` -- unsigned Euclidean distance to the shape's
  boundary, defined everywhere;
* ``inside(P)`` -- membership in the open interior;
* ``closure(P)`` -- membership in the closure.

Domains are built from shapes in :mod:`qhlab.geometry.domains`.
"""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 1 << 15


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", v, v))


def segment_distance(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Minimum distance from each row of ``P`` to the segments ``[A_k, B_k]``."""
    P = np.asarray(P, dtype=float)
    out = np.empty(P.shape[0])
    D = B - A
    dd = np.einsum("ij,ij->i", D, D)
    dd_safe = np.where(dd > 0, dd, 1.0)
    for s in range(0, P.shape[0], _CHUNK):
        Q = P[s:s + _CHUNK, None, :] - A[None, :, :]
        t = np.einsum("pkd,kd->pk", Q, D) / dd_safe
        np.clip(t, 0.0, 1.0, out=t)
        t[:, dd == 0] = 0.0
        R = Q - t[..., None] * D[None, :, :]
        out[s:s + _CHUNK] = np.sqrt(np.min(np.einsum("pkd,pkd->pk", R, R), axis=1))
    return out


def winding_number(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Winding number of the closed polygon ``V`` around each 2D point."""
    A = V
    B = np.roll(V, -1, axis=0)
    out = np.zeros(P.shape[0], dtype=np.int64)
    for s in range(0, P.shape[0], _CHUNK):
        px = P[s:s + _CHUNK, 0:1]
        py = P[s:s + _CHUNK, 1:2]
        ax, ay, bx, by = A[:, 0], A[:, 1], B[:, 0], B[:, 1]
        cross = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        up = (ay <= py) & (by > py) & (cross > 0)
        down = (ay > py) & (by <= py) & (cross < 0)
        out[s:s + _CHUNK] = up.sum(axis=1) - down.sum(axis=1)
    return out


class Shape:
    dimension: int

    def boundary_distance(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inside(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def closure(self, P: np.ndarray) -> np.ndarray:
        return self.inside(P) | (self.boundary_distance(P) <= 0.0)

    def bounds(self):
        """Axis-aligned bounding box ``(lo, hi)`` of the closure, or None."""
        return None


class Ball(Shape):
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.dimension = self.center.shape[0]

    def _r(self, P):
        return _norm(P - self.center)

    def boundary_distance(self, P):
        return np.abs(self._r(P) - self.radius)

    def inside(self, P):
        return self._r(P) < self.radius

    def closure(self, P):
        return self._r(P) <= self.radius

    def bounds(self):
        return self.center - self.radius, self.center + self.radius


class HalfSpace(Shape):
    """``{x : x_n > 0}``."""

    def __init__(self, dimension):
        self.dimension = int(dimension)

    def boundary_distance(self, P):
        return np.abs(P[:, -1])

    def inside(self, P):
        return P[:, -1] > 0.0

    def closure(self, P):
        return P[:, -1] >= 0.0


class PointSet(Shape):
    """A finite set of points; empty interior, closure is the set itself."""

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.dimension = self.points.shape[1]

    def boundary_distance(self, P):
        out = np.full(P.shape[0], np.inf)
        for q in self.points:
            np.minimum(out, _norm(P - q), out=out)
        return out

    def inside(self, P):
        return np.zeros(P.shape[0], dtype=bool)

    def closure(self, P):
        return self.boundary_distance(P) == 0.0

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)


class Box(Shape):
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.dimension = self.lo.shape[0]

    def boundary_distance(self, P):
        inner = np.minimum(P - self.lo, self.hi - P).min(axis=1)
        outer = _norm(np.maximum(np.maximum(self.lo - P, P - self.hi), 0.0))
        return np.where(inner >= 0.0, inner, outer)

    def inside(self, P):
        return np.all((P > self.lo) & (P < self.hi), axis=1)

    def closure(self, P):
        return np.all((P >= self.lo) & (P <= self.hi), axis=1)

    def bounds(self):
        return self.lo.copy(), self.hi.copy()


class Polygon(Shape):
    """Simple closed polygon in the plane (either orientation)."""

    dimension = 2

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise ValueError("polygon needs at least three 2D vertices")
        if np.allclose(V[0], V[-1]):
            V = V[:-1]
        self.vertices = V
        self._A = V
        self._B = np.roll(V, -1, axis=0)

    def boundary_distance(self, P):
        return segment_distance(P, self._A, self._B)

    def inside(self, P):
        return winding_number(P, self.vertices) != 0

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


class HalfStrip(Shape):
    """``{(x, y) : x > 0, |y| < w}``."""

    dimension = 2

    def __init__(self, half_width=1.0):
        self.w = float(half_width)

    def boundary_distance(self, P):
        x, y = P[:, 0], P[:, 1]
        ay = np.abs(y)
        # rays y = +-w, x >= 0; the nearer one is the one on the same side
        ray = np.where(x >= 0.0, np.abs(ay - self.w), np.hypot(x, ay - self.w))
        seg = np.where(ay <= self.w, np.abs(x), np.hypot(x, ay - self.w))
        return np.minimum(ray, seg)

    def inside(self, P):
        return (P[:, 0] > 0.0) & (np.abs(P[:, 1]) < self.w)

    def closure(self, P):
        return (P[:, 0] >= 0.0) & (np.abs(P[:, 1]) <= self.w)


def _newton_bracket(h, dh, lo, hi, iters=100):
    """Root of an increasing function on ``[lo, hi]`` (clamped to the ends).

    ``h`` and ``dh`` take ``(s, index)`` so that only unfinished entries are
    iterated.
    """
    idx = np.arange(lo.shape[0])
    flo = h(lo, idx)
    fhi = h(hi, idx)
    s = np.where(flo >= 0.0, lo, np.where(fhi <= 0.0, hi, 0.5 * (lo + hi)))
    act = np.flatnonzero((flo < 0.0) & (fhi > 0.0))
    a, b = lo[act], hi[act]
    x = s[act]
    for _ in range(iters):
        if act.size == 0:
            break
        f = h(x, act)
        neg = f < 0.0
        a = np.where(neg, x, a)
        b = np.where(neg, b, x)
        d = dh(x, act)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - f / d
        ok = np.isfinite(step) & (step >= a) & (step <= b)
        new = np.where(f == 0.0, x, np.where(ok, step, 0.5 * (a + b)))
        # the distance error is quadratic in the parameter error
        done = ok & (np.abs(step - x) <= 1e-14 * (1.0 + np.abs(x))) | (f == 0.0)
        s[act] = new
        keep = ~done
        act, a, b, x = act[keep], a[keep], b[keep], new[keep]
    return s


class ExpCusp(Shape):
    """``{(x, y) : x > 0, |y| < exp(-1 - a x)}`` for a cusp rate ``a > 0``.

    The nearest point on a curved side minimizes
    ``F(s) = (s - px)^2 + (g(s) - q)^2``; its stationarity function
    ``h = F'/2`` has ``h' = 1 + a^2 g (2 g - q)``, a quadratic in ``g(s)``, so
    ``h`` is increasing except on one explicitly computable interval.  Each
    increasing piece holds at most one minimizer, found by safeguarded Newton.
    """

    dimension = 2

    def __init__(self, rate=1.0):
        self.a = float(rate)
        self.g0 = math.exp(-1.0)

    def g(self, s):
        return np.exp(-1.0 - self.a * s)

    def _s_of_g(self, gv):
        return (-1.0 - np.log(gv)) / self.a

    def _curve_parameter(self, px, q):
        a = self.a
        s0 = np.maximum(px, 0.0)
        U = np.hypot(s0 - px, self.g(s0) - q)
        # the nearest point is within U of (px, q), hence |s - px| <= U
        lo = np.maximum(px - U, 0.0)
        hi = np.maximum(px + U, 0.0)

        def h(s, i):
            gs = self.g(s)
            return s - px[i] - a * gs * (gs - q[i])

        def dh(s, i):
            gs = self.g(s)
            return 1.0 + 2.0 * a * a * gs * gs - a * a * q[i] * gs

        disc = q * q - 8.0 / (a * a)
        pos = disc > 0
        root = np.sqrt(np.where(pos, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            # h decreases for g between g_minus and g_plus
            s_left = np.where(pos, self._s_of_g(np.maximum((q + root) / 4.0, 1e-300)), hi)
            s_right = np.where(pos, self._s_of_g(np.maximum((q - root) / 4.0, 1e-300)), hi)
        e1 = np.clip(s_left, lo, hi)
        b2 = np.clip(s_right, lo, hi)
        cands = [lo, hi, _newton_bracket(h, dh, lo, e1)]
        two = pos & (b2 < hi)
        if two.any():
            c2 = e1.copy()
            sub = np.flatnonzero(two)
            c2[two] = _newton_bracket(lambda s, i: h(s, sub[i]), lambda s, i: dh(s, sub[i]),
                                      b2[two], hi[two])
            cands.append(c2)
        C = np.stack(cands, axis=1)
        F = (C - px[:, None]) ** 2 + (self.g(C) - q[:, None]) ** 2
        return C[np.arange(C.shape[0]), np.argmin(F, axis=1)]

    def curve_distance(self, px, q):
        """Distance from ``(px, q)`` to the upper side ``{(s, g(s)) : s >= 0}``."""
        s = self._curve_parameter(px, q)
        return np.hypot(s - px, self.g(s) - q)

    def boundary_distance(self, P):
        px = np.ascontiguousarray(P[:, 0], dtype=float)
        q = np.abs(P[:, 1])
        # the side on the same half plane is never farther than the mirrored one
        curve = self.curve_distance(px, q)
        seg = np.where(q <= self.g0, np.abs(px), np.hypot(px, q - self.g0))
        return np.minimum(curve, seg)

    def inside(self, P):
        return (P[:, 0] > 0.0) & (np.abs(P[:, 1]) < self.g(P[:, 0]))

    def closure(self, P):
        return (P[:, 0] >= 0.0) & (np.abs(P[:, 1]) <= self.g(np.maximum(P[:, 0], 0.0)))


class Annulus(Shape):
    def __init__(self, center, inner, outer):
        self.center = np.asarray(center, dtype=float)
        self.r1 = float(inner)
        self.r2 = float(outer)
        self.dimension = self.center.shape[0]

    def boundary_distance(self, P):
        r = _norm(P - self.center)
        return np.minimum(np.abs(r - self.r1), np.abs(r - self.r2))

    def inside(self, P):
        r = _norm(P - self.center)
        return (r > self.r1) & (r < self.r2)

    def closure(self, P):
        r = _norm(P - self.center)
        return (r >= self.r1) & (r <= self.r2)

    def bounds(self):
        return self.center - self.r2, self.center + self.r2


class RevolvedPolygon(Shape):
    """Solid of revolution in R^3 of a planar polygon in the ``(r, h)`` half plane.

    ``r`` is the distance to the rotation axis and ``h`` the coordinate along
    it.  The polygon must lie in ``r >= 0``.  Distance to the revolved surface
    equals the planar distance from ``(r, h)`` to the polygon boundary.
    """

    dimension = 3

    def __init__(self, vertices, axis=1):
        self.profile = Polygon(vertices)
        if np.any(self.profile.vertices[:, 0] < 0.0):
            raise ValueError("profile polygon must lie in r >= 0")
        self.axis = int(axis)
        self._others = [i for i in range(3) if i != self.axis]

    def to_profile(self, P):
        r = np.hypot(P[:, self._others[0]], P[:, self._others[1]])
        return np.column_stack([r, P[:, self.axis]])

    def boundary_distance(self, P):
        return self.profile.boundary_distance(self.to_profile(P))

    def inside(self, P):
        Q = self.to_profile(P)
        return self.profile.inside(Q) & (self.profile.boundary_distance(Q) > 0.0)

    def bounds(self):
        R = float(self.profile.vertices[:, 0].max())
        hlo = float(self.profile.vertices[:, 1].min())
        hhi = float(self.profile.vertices[:, 1].max())
        lo = np.full(3, -R)
        hi = np.full(3, R)
        lo[self.axis], hi[self.axis] = hlo, hhi
        return lo, hi


def staircase_vertices(m_max: int) -> np.ndarray:
    """Boundary of the union of open rectangles ``|x| < w_m, 0 < y < h_m``.

    ``w_m = 1/(1 + log m)`` shrinks and ``h_m = m e / 10`` grows with ``m``,
    so at height ``h_{m-1} <= y < h_m`` the union is ``|x| < w_m``.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    m = np.arange(1, m_max + 1)
    w = 1.0 / (1.0 + np.log(m))
    h = m * math.e / 10.0
    right = [(w[0], 0.0)]
    for i in range(m_max):
        right.append((w[i], h[i]))
        if i + 1 < m_max:
            right.append((w[i + 1], h[i]))
    left = [(-x, y) for (x, y) in reversed(right)]
    return np.array(right + left)


def comb_points(k: int, n: int) -> np.ndarray:
    """Four-point clusters at distance ``2**-n`` around ``(c_m, c_m)``, ``c_m = 1 - 2**-m``."""
    if not (0 <= k < n):
        raise ValueError("comb clusters need 0 <= k < n")
    e = 2.0 ** -n
    pts = []
    for mm in range(k + 1):
        c = 1.0 - 2.0 ** -mm
        pts += [(c, c + e), (c, c - e), (c + e, c), (c - e, c)]
    return np.array(pts)
