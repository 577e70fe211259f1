"""Numerical quasihyperbolic distances and geodesics.

The estimate ``k_hat`` is always the length of an explicit admissible path,
so ``k <= k_hat`` up to quadrature error.  Each refinement level builds a
boundary-adapted mesh, finds a shortest graph path, and improves it by local
vertex perturbation; the straight segment (when it stays in the domain) and
every earlier level's path remain competitors, so ``k_hat`` never increases
under refinement.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..closed_form import MetricResult, closed_form_k
from ..errors import (
    BudgetExceeded,
    DimensionMismatch,
    IndexOutOfRange,
    NoClosedForm,
    PointOutsideDomain,
    SegmentExitsDomain,
)
from ..geometry.domains import DomainOracle
from .mesh import attach_points, build_mesh
from .quadrature import segments_inside, simpson_costs
from .smoothing import resample, smooth_path

FINAL_QUAD_TOL = 1e-11
# relative accuracy for straight-segment costs used as upper bounds
SEGMENT_REL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Refinement schedule and budgets.

    Level ``l`` uses the spacing target ``min(h0 / 2**l, rel0 / 2**l * delta)``
    with ``h0 = region side / h_div`` and a floor ``mu0 / 2**l`` times the
    distance-ratio scale ``min_e (delta(e) + |p - e|)`` around the endpoints.
    """

    max_levels: int = 6
    min_levels: int = 2
    max_nodes: int = 2_000_000
    h_div: float = 16.0
    rel0: float = 0.25
    mu0: float = 0.25
    inflate: float = 4.0
    max_region_doublings: int = 6
    smooth_factor: float = 0.01


DEFAULT_CONFIG = SolverConfig()


@dataclass
class GeodesicPath:
    """Polyline approximating a quasihyperbolic geodesic."""

    vertices: np.ndarray
    k_length: float
    refinement_level: int
    segment_k: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tol: float = 1e-3
    converged: bool = True

    @property
    def cumulative_k(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_k)])

    def to_csv(self, fh=None) -> str:
        """Write one vertex per row with columns ``x1..xn, cumulative_k``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.vertices.shape[1]
        w.writerow([f"x{i + 1}" for i in range(n)] + ["cumulative_k"])
        for p, c in zip(self.vertices, self.cumulative_k):
            w.writerow([format(float(v), ".17g") for v in p] + [format(float(c), ".17g")])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def _point(oracle, x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim != 1 or a.shape[0] != oracle.dimension:
        raise DimensionMismatch(f"{name} must have dimension {oracle.dimension}")
    d = oracle.delta(a)
    if not d > 0:
        raise PointOutsideDomain(f"{name} is not in the domain")
    return a, d


def polyline_costs(oracle: DomainOracle, P, tol=FINAL_QUAD_TOL) -> np.ndarray:
    P = np.asarray(P, float)
    if P.shape[0] < 2:
        return np.zeros(0)
    return simpson_costs(oracle, P[:-1], P[1:], tol=tol)


def segment_k_length(oracle: DomainOracle, a, b, tol: float = FINAL_QUAD_TOL) -> float:
    """Quasihyperbolic length of the straight segment ``[a, b]``."""
    a, da = _point(oracle, a, "a")
    b, db = _point(oracle, b, "b")
    if np.array_equal(a, b):
        return 0.0
    if not segments_inside(oracle, a[None], b[None], np.array([da]), np.array([db]))[0]:
        raise SegmentExitsDomain("the segment leaves the domain")
    return float(simpson_costs(oracle, a[None], b[None], np.array([da]), np.array([db]), tol=tol)[0])


class _Best:
    def __init__(self):
        self.value = math.inf
        self.path = None
        self.level = -1
        self.costs = np.zeros(0)

    def offer(self, P, oracle, level):
        if P is None or P.shape[0] < 2:
            return
        costs = polyline_costs(oracle, P)
        v = float(np.sum(costs))
        if v < self.value:
            self.value, self.path, self.level = v, P, level
            self.costs = costs


def _graph_path(oracle, mesh, x, y, dx, dy):
    N = mesh.node_count
    att = attach_points(oracle, mesh, [x, y], [dx, dy])
    rows, cols, vals = [], [], []
    for k, (idx, w) in enumerate(att):
        rows.append(np.full(idx.size, N + k))
        cols.append(idx)
        vals.append(w)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    extra = coo_matrix((np.concatenate([v, v]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                       shape=(N + 2, N + 2))
    G = mesh.graph.tocoo()
    G = coo_matrix((G.data, (G.row, G.col)), shape=(N + 2, N + 2)) + extra
    dist, pred = dijkstra(G.tocsr(), directed=False, indices=N, return_predecessors=True)
    if not np.isfinite(dist[N + 1]):
        return None
    order = []
    k = N + 1
    while k != N:
        order.append(k)
        k = pred[k]
        if k < 0:
            return None
    order.append(N)
    order.reverse()
    pts = np.vstack([mesh.nodes, x[None], y[None]])
    return pts[order]


def _solve_region(oracle, x, y, dx, dy, region, tol, target, cfg, best, stats):
    lo, hi = (np.asarray(v, float) for v in region)
    side = float((hi - lo).max())
    h0 = side / cfg.h_div
    history = []
    converged = False
    for level in range(cfg.max_levels):
        scale = 0.5 ** level
        mu = cfg.mu0 * scale

        def floor_fn(C, mu=mu):
            ex = dx + np.linalg.norm(C - x, axis=1)
            ey = dy + np.linalg.norm(C - y, axis=1)
            return mu * np.minimum(ex, ey)

        try:
            mesh = build_mesh(oracle, (lo, hi), h0 * scale, cfg.rel0 * scale, floor_fn,
                              cfg.max_nodes)
        except BudgetExceeded:
            stats["budget_exceeded"] = True
            break
        stats["nodes"] = mesh.node_count
        stats["edges"] = mesh.edge_count
        P = _graph_path(oracle, mesh, x, y, dx, dy)
        if P is not None:
            best.offer(smooth_path(oracle, P, cfg.smooth_factor * tol), oracle, level)
        if best.path is not None and best.level >= 0:
            best.offer(smooth_path(oracle, best.path.copy(), cfg.smooth_factor * tol), oracle, level)
        history.append(best.value)
        stats["levels"] = stats.get("levels", 0) + 1
        if target is not None and best.value <= target:
            stats["target_reached"] = True
            break
        if len(history) >= cfg.min_levels:
            delta = history[-2] - history[-1]
            stats["refine_delta"] = delta
            if delta < tol:
                converged = True
                break
    return history, converged


def _default_box(x, y, dx, dy, factor):
    c = 0.5 * (x + y)
    half = factor * max(0.5 * float(np.linalg.norm(x - y)), min(dx, dy))
    return c - half, c + half


def _numeric(oracle, x, y, dx, dy, tol, region, target, cfg):
    best = _Best()
    stats: dict = {}
    j = math.log1p(float(np.linalg.norm(x - y)) / min(dx, dy))
    if segments_inside(oracle, x[None], y[None], np.array([dx]), np.array([dy]))[0]:
        S = resample(oracle, np.vstack([x, y]))
        best.offer(S, oracle, -1)
        if target is None or best.value > target:
            best.offer(smooth_path(oracle, S.copy(), cfg.smooth_factor * tol), oracle, -1)
    converged = False
    if target is not None and best.value <= target:
        stats["target_reached"] = True
    elif region is not None or oracle.is_bounded:
        reg = region if region is not None else oracle.bounds()
        _, converged = _solve_region(oracle, x, y, dx, dy, reg, tol, target, cfg, best, stats)
        stats["region"] = [list(map(float, reg[0])), list(map(float, reg[1]))]
    else:
        lo, hi = _default_box(x, y, dx, dy, cfg.inflate)
        prev = math.inf
        region_converged = False
        for _ in range(cfg.max_region_doublings + 1):
            _, converged = _solve_region(oracle, x, y, dx, dy, (lo, hi), tol, target, cfg, best,
                                         stats)
            stats["region"] = [list(map(float, lo)), list(map(float, hi))]
            if stats.get("target_reached"):
                break
            if math.isfinite(prev):
                stats["region_delta"] = prev - best.value
            if prev - best.value < tol:
                region_converged = True
                break
            prev = best.value
            c = 0.5 * (lo + hi)
            lo, hi = c - 2.0 * (c - lo), c + 2.0 * (hi - c)
        converged = converged and region_converged
    if not math.isfinite(best.value):
        raise BudgetExceeded("no admissible path between the points was found")
    refine = max(stats.get("refine_delta", 0.0), stats.get("region_delta", 0.0))
    if not converged:
        refine = max(refine, best.value - j)
    err = max(refine, best.value - j)
    info = dict(stats)
    info["j"] = j
    return MetricResult(best.value, method="numeric", error_bound=err, lower=j,
                        converged=converged, info=info), best


def k_distance(oracle: DomainOracle, x, y, tol: float = 1e-3, method: str = "auto",
               region=None, target: float | None = None,
               config: SolverConfig = DEFAULT_CONFIG) -> MetricResult:
    """Quasihyperbolic distance ``k_G(x, y)``.

    ``method`` is ``"auto"`` (closed form when one applies, else numeric),
    ``"closed"`` (raise :class:`NoClosedForm` when none applies) or
    ``"numeric"``.  Numeric results are upper estimates with
    ``lower`` set to the distance ratio metric and ``error_bound`` the larger
    of the last refinement change and ``k_hat - j``.  With ``target`` given,
    refinement stops as soon as ``k_hat <= target`` (the estimate can only
    decrease further).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, dx = _point(oracle, x, "x")
    y, dy = _point(oracle, y, "y")
    if method not in ("auto", "closed", "numeric"):
        raise ValueError(f"unknown method '{method}'")
    if np.array_equal(x, y):
        return MetricResult(0.0, method="closed_form" if method != "numeric" else "numeric",
                            lower=0.0)
    if method != "numeric":
        try:
            return closed_form_k(oracle, x, y)
        except NoClosedForm:
            if method == "closed":
                raise
    if oracle.dimension not in (2, 3):
        raise NoClosedForm("numeric quasihyperbolic distances support dimensions 2 and 3 only")
    res, _ = _numeric(oracle, x, y, dx, dy, tol, region, target, config)
    return res


def geodesic(oracle: DomainOracle, x, y, tol: float = 1e-3, region=None,
             config: SolverConfig = DEFAULT_CONFIG) -> GeodesicPath:
    """Polyline realizing the numeric ``k_hat`` of :func:`k_distance`."""
    x, dx = _point(oracle, x, "x")
    y, dy = _point(oracle, y, "y")
    if np.array_equal(x, y):
        return GeodesicPath(x[None].copy(), 0.0, 0, np.zeros(0), tol)
    if oracle.dimension not in (2, 3):
        raise NoClosedForm("numeric geodesics support dimensions 2 and 3 only")
    res, best = _numeric(oracle, x, y, dx, dy, tol, region, None, config)
    costs = best.costs
    return GeodesicPath(best.path, float(np.sum(costs)), max(best.level, 0), costs, tol,
                        res.converged)


def additivity_check(oracle: DomainOracle, path: GeodesicPath, z_index: int,
                     method: str = "auto") -> float:
    """``|k(x, z) + k(z, y) - k(x, y)|`` for the path vertex ``z = vertices[z_index]``."""
    m = path.vertices.shape[0]
    if not (1 <= z_index <= m - 2):
        raise IndexOutOfRange(f"z_index must name an interior vertex (1..{m - 2})")
    x, z, y = path.vertices[0], path.vertices[z_index], path.vertices[-1]
    kxz = k_distance(oracle, x, z, path.tol, method).value
    kzy = k_distance(oracle, z, y, path.tol, method).value
    kxy = k_distance(oracle, x, y, path.tol, method).value
    return abs(kxz + kzy - kxy)
