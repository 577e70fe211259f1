"""Domain descriptions and their distance-to-boundary oracles."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DimensionMismatch, InvalidSpec
from . import shapes as sh

KINDS = (
    "ball",
    "half_space",
    "punctured_space",
    "complement_closed_ball",
    "half_strip",
    "exp_cusp",
    "exp_cusp_complement",
    "rectangle",
    "polygon",
    "polygon_union",
    "annulus",
    "revolved_triangle",
    "comb_square",
    "remove_points",
    "remove_closed_ball",
    "remove_polygon_set",
)
REMOVAL_KINDS = ("remove_points", "remove_closed_ball", "remove_polygon_set")
DEFAULT_TRIANGLE = [[1.0, -1.0], [0.0, 0.0], [1.0, 1.0]]


@dataclass(frozen=True)
class DomainSpec:
    """JSON-serializable description ``{"kind", "params", "base"}`` of a domain."""

    kind: str
    params: dict = field(default_factory=dict)
    base: "DomainSpec | None" = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind, "params": copy.deepcopy(self.params)}
        if self.base is not None:
            d["base"] = self.base.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidSpec("domain spec needs a 'kind' field")
        unknown = set(d) - {"kind", "params", "base"}
        if unknown:
            raise InvalidSpec(f"unknown domain spec fields: {sorted(unknown)}")
        params = d.get("params") or {}
        if not isinstance(params, dict):
            raise InvalidSpec("'params' must be an object")
        base = d.get("base")
        return cls(str(d["kind"]), copy.deepcopy(params),
                   None if base is None else cls.from_dict(base))

    @classmethod
    def from_json(cls, text: str) -> "DomainSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"domain spec is not valid JSON: {exc}") from None
        return cls.from_dict(d)


def _vec(params, key, default=None, dim=None):
    v = params.get(key, default)
    if v is None:
        raise InvalidSpec(f"missing parameter '{key}'")
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise InvalidSpec(f"parameter '{key}' must be numeric") from None
    if a.ndim == 0 and dim is not None:
        a = np.full(dim, float(a))
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise InvalidSpec(f"parameter '{key}' must be a finite vector")
    if dim is not None and a.shape[0] != dim:
        raise InvalidSpec(f"parameter '{key}' has dimension {a.shape[0]}, expected {dim}")
    return a


def _num(params, key, default=None, positive=False):
    v = params.get(key, default)
    if v is None:
        raise InvalidSpec(f"missing parameter '{key}'")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise InvalidSpec(f"parameter '{key}' must be a number") from None
    if not np.isfinite(x):
        raise InvalidSpec(f"parameter '{key}' must be finite")
    if positive and x <= 0.0:
        raise InvalidSpec(f"parameter '{key}' must be positive")
    return x


def _int(params, key, default):
    v = params.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (
        isinstance(v, float) and v.is_integer()
    ):
        raise InvalidSpec(f"parameter '{key}' must be an integer")
    return int(v)


def _dim(params, fallback_keys=("center",), default=2):
    if "dim" in params:
        n = _int(params, "dim", default)
    else:
        n = default
        for k in fallback_keys:
            if k in params and np.ndim(params[k]) == 1:
                n = len(params[k])
                break
    if n < 2:
        raise InvalidSpec("dimension must be at least 2")
    return n


def _polygon(vertices):
    try:
        return sh.Polygon(vertices)
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from None


class DomainOracle:
    """Immutable membership and boundary-distance oracle for one domain.

    The open set is either the interior of ``shape`` or, when ``complement``
    is set, the complement of its closure.  Removal kinds wrap a base oracle
    and subtract closed obstacles.
    """

    def __init__(self, spec: DomainSpec, dimension: int, shape=None, complement=False,
                 base: "DomainOracle | None" = None, obstacles=()):
        self.spec = spec
        self.kind = spec.kind
        self.dimension = dimension
        self.shape = shape
        self.complement = complement
        self.base = base
        self.obstacles = tuple(obstacles)

    # -- batch primitives -------------------------------------------------
    def _as_batch(self, P):
        P = np.asarray(P, dtype=float)
        single = P.ndim == 1
        P2 = P.reshape(1, -1) if single else P
        if P2.ndim != 2 or P2.shape[1] != self.dimension:
            raise DimensionMismatch(
                f"expected points of dimension {self.dimension}, got shape {P.shape}")
        return P2, single

    def boundary_distance(self, P) -> np.ndarray:
        """Unsigned distance to the boundary of the open set, for any point."""
        P, _ = self._as_batch(P)
        if self.base is not None:
            d = self.base.boundary_distance(P)
            for ob in self.obstacles:
                d = np.minimum(d, ob.boundary_distance(P))
            return d
        return self.shape.boundary_distance(P)

    def _member(self, P):
        if self.base is not None:
            ok = self.base._member(P)
            for ob in self.obstacles:
                ok &= ~ob.closure(P)
            return ok
        if self.complement:
            return ~self.shape.closure(P)
        return self.shape.inside(P)

    def contains_batch(self, P) -> np.ndarray:
        P, _ = self._as_batch(P)
        return self._member(P) & (self.boundary_distance(P) > 0.0)

    def delta_batch(self, P) -> np.ndarray:
        P, _ = self._as_batch(P)
        d = self.boundary_distance(P)
        return np.where(self._member(P) & (d > 0.0), d, 0.0)

    # -- scalar conveniences ---------------------------------------------
    def delta(self, x):
        P, single = self._as_batch(x)
        d = self.delta_batch(P)
        return float(d[0]) if single else d

    def contains(self, x):
        P, single = self._as_batch(x)
        c = self.contains_batch(P)
        return bool(c[0]) if single else c

    def bounds(self):
        """Bounding box ``(lo, hi)`` of a bounded domain, else None."""
        if self.base is not None:
            return self.base.bounds()
        if self.complement or self.shape is None:
            return None
        return self.shape.bounds()

    @property
    def is_bounded(self) -> bool:
        return self.bounds() is not None

    def __repr__(self) -> str:
        return f"DomainOracle({self.spec.to_json()})"


def _build(spec: DomainSpec) -> DomainOracle:
    k, p = spec.kind, spec.params
    if k not in KINDS:
        raise InvalidSpec(f"unknown domain kind '{k}'")
    if k not in REMOVAL_KINDS and spec.base is not None:
        raise InvalidSpec(f"kind '{k}' does not take a base domain")
    if k == "ball" or k == "complement_closed_ball":
        n = _dim(p)
        c = _vec(p, "center", 0.0, n)
        r = _num(p, "radius", 1.0, positive=True)
        return DomainOracle(spec, n, sh.Ball(c, r), complement=(k != "ball"))
    if k == "half_space":
        n = _dim(p)
        return DomainOracle(spec, n, sh.HalfSpace(n))
    if k == "punctured_space":
        n = _dim(p)
        c = _vec(p, "center", 0.0, n)
        return DomainOracle(spec, n, sh.PointSet(c[None, :]), complement=True)
    if k == "half_strip":
        w = _num(p, "half_width", 1.0, positive=True)
        return DomainOracle(spec, 2, sh.HalfStrip(w), complement=bool(p.get("complement", False)))
    if k in ("exp_cusp", "exp_cusp_complement"):
        a = _num(p, "rate", 1.0, positive=True)
        return DomainOracle(spec, 2, sh.ExpCusp(a), complement=(k == "exp_cusp_complement"))
    if k == "rectangle":
        lo = _vec(p, "lo")
        hi = _vec(p, "hi", dim=lo.shape[0])
        if lo.shape[0] < 2:
            raise InvalidSpec("dimension must be at least 2")
        if np.any(hi <= lo):
            raise InvalidSpec("rectangle needs lo < hi in every coordinate")
        return DomainOracle(spec, lo.shape[0], sh.Box(lo, hi))
    if k == "polygon":
        poly = _polygon(p.get("vertices"))
        if abs(poly.area) <= 0.0:
            raise InvalidSpec("polygon has zero area")
        return DomainOracle(spec, 2, poly, complement=bool(p.get("complement", False)))
    if k == "polygon_union":
        m = _int(p, "m_max", 8)
        if m < 1:
            raise InvalidSpec("m_max must be at least 1")
        return DomainOracle(spec, 2, sh.Polygon(sh.staircase_vertices(m)),
                            complement=bool(p.get("complement", False)))
    if k == "annulus":
        n = _dim(p)
        c = _vec(p, "center", 0.0, n)
        r1 = _num(p, "inner", None, positive=True)
        r2 = _num(p, "outer", None, positive=True)
        if r2 <= r1:
            raise InvalidSpec("annulus needs inner < outer")
        return DomainOracle(spec, n, sh.Annulus(c, r1, r2))
    if k == "revolved_triangle":
        axis = _int(p, "axis", 1)
        if axis not in (0, 1, 2):
            raise InvalidSpec("axis must be 0, 1 or 2")
        try:
            shape = sh.RevolvedPolygon(p.get("vertices", DEFAULT_TRIANGLE), axis)
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from None
        return DomainOracle(spec, 3, shape, complement=bool(p.get("complement", False)))
    if k == "comb_square":
        kk = _int(p, "k", 6)
        n = _int(p, "n", kk + 2)
        if kk < 0 or n <= kk:
            raise InvalidSpec("comb_square needs 0 <= k < n")
        base = DomainOracle(DomainSpec("rectangle", {"lo": [-1, -1], "hi": [1, 1]}), 2,
                            sh.Box([-1.0, -1.0], [1.0, 1.0]))
        return DomainOracle(spec, 2, base=base, obstacles=[sh.PointSet(sh.comb_points(kk, n))])
    return _build_removal(spec)


def _build_removal(spec: DomainSpec) -> DomainOracle:
    k, p = spec.kind, spec.params
    if spec.base is None:
        raise InvalidSpec(f"kind '{k}' needs a base domain")
    base = _build(spec.base)
    n = base.dimension
    if k == "remove_points":
        pts = np.asarray(p.get("points"), dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidSpec("'points' must be a nonempty list of points")
        if pts.shape[1] != n:
            raise InvalidSpec("removed points do not match the base dimension")
        if not np.all(base.contains_batch(pts)):
            raise InvalidSpec("removed points must lie strictly inside the base domain")
        return DomainOracle(spec, n, base=base, obstacles=[sh.PointSet(pts)])
    if k == "remove_closed_ball":
        c = _vec(p, "center", None, n)
        r = _num(p, "radius", None, positive=True)
        # the closed ball sits in the open base iff its center does, with room r
        if not (base.delta(c) > r):
            raise InvalidSpec("removed ball must lie strictly inside the base domain")
        return DomainOracle(spec, n, base=base, obstacles=[sh.Ball(c, r)])
    polys = p.get("polygons")
    if n != 2:
        raise InvalidSpec("polygon obstacles need a planar base")
    if not isinstance(polys, list) or not polys:
        raise InvalidSpec("'polygons' must be a nonempty list of vertex lists")
    obstacles = []
    for verts in polys:
        poly = _polygon(verts)
        A, B = poly._A, poly._B
        t = np.linspace(0.0, 1.0, 257)[None, :, None]
        edge_pts = (A[:, None, :] + t * (B - A)[:, None, :]).reshape(-1, 2)
        if not np.all(base.contains_batch(edge_pts)):
            raise InvalidSpec("removed polygons must lie strictly inside the base domain")
        obstacles.append(poly)
    return DomainOracle(spec, n, base=base, obstacles=obstacles)


def make_domain(spec) -> DomainOracle:
    """Build an oracle from a :class:`DomainSpec`, a dict or a JSON string."""
    if isinstance(spec, str):
        spec = DomainSpec.from_json(spec)
    elif isinstance(spec, dict):
        spec = DomainSpec.from_dict(spec)
    elif not isinstance(spec, DomainSpec):
        raise InvalidSpec(f"cannot build a domain from {type(spec).__name__}")
    return _build(spec)


def delta(oracle: DomainOracle, x):
    """Distance from ``x`` to the boundary, 0 outside the open set."""
    return oracle.delta(x)


def contains(oracle: DomainOracle, x):
    return oracle.contains(x)
