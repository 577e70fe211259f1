"""Machine-checkable inequalities between j, k, rho, q and Euclidean distances.

Every :class:`BoundSpec` bundles a sampler of configurations, a hypothesis
filter and an assertion made of inequality or equality *parts*.  Samplers
draw configuration ``i`` from its own stream, so a check over ``N`` samples is
reproducible in any chunking.  Configurations whose hypothesis is a
measure-zero condition (points on a prescribed segment, equal norms) are
constructed rather than filtered.

Parts come in two flavours: ``le`` (``lhs <= rhs``) and ``eq``
(``lhs == rhs``).  A part flagged ``k_upper`` bounds the quasihyperbolic
distance from above; with numeric distances it is checked as
``k_hat <= rhs + tol``, which is sound because ``k <= k_hat``.  Lower bounds on
``k`` are checked against the closed form when one applies and otherwise
against the distance ratio metric, the solver's certified lower bracket.
Where ``k`` of a comparison domain appears on the right of an upper bound it
is likewise replaced by ``j``, which only makes the check stricter.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..closed_form import (
    chordal_batch,
    closed_form_k_batch,
    inversion_map,
    j_from_deltas,
    rho_ball_batch,
    rho_halfspace_batch,
)
from ..errors import InvalidSpec
from ..geometry.domains import DomainOracle, make_domain
from ..rng import StreamBatch, name_key
from .constants import a_alpha_theta, a_theta, jung_radius


@dataclass
class Part:
    """One inequality (``kind="le"``) or identity (``kind="eq"``) over a batch."""

    label: str
    lhs: np.ndarray
    rhs: np.ndarray
    kind: str = "le"
    k_upper: bool = False
    target: np.ndarray | None = None


@dataclass(frozen=True)
class BoundSpec:
    """A catalogued inequality.

    ``sampler(streams, params)`` returns a dict of arrays (one row per
    configuration), ``hypothesis(cfg, params)`` a boolean mask and
    ``assertion(cfg, params, metrics)`` a list of :class:`Part`.  ``witness``
    returns the parts claimed to hold with equality at the sharpness
    configurations.  ``backend`` is ``"closed"`` when only exact formulas are
    needed and ``"numeric"`` when ``k`` must be estimated.
    """

    name: str
    citation: str
    sampling: str
    sampler: Callable
    hypothesis: Callable
    assertion: Callable
    backend: str = "closed"
    witness: Callable | None = None
    params: dict = field(default_factory=dict)

    def with_params(self, **params) -> "BoundSpec":
        unknown = set(params) - set(self.params)
        if unknown:
            raise InvalidSpec(f"bound '{self.name}' has no parameters {sorted(unknown)}")
        merged = dict(self.params)
        merged.update(params)
        return BoundSpec(self.name, self.citation, self.sampling, self.sampler, self.hypothesis,
                         self.assertion, self.backend, self.witness, merged)


# --- shared helpers ------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _domain(spec_json: str) -> DomainOracle:
    return make_domain(spec_json)


def unit_ball(n: int = 2, radius: float = 1.0) -> DomainOracle:
    return _domain('{"kind":"ball","params":{"center":%s,"radius":%r}}' % ([0.0] * n, radius))


def half_space(n: int = 2) -> DomainOracle:
    return _domain('{"kind":"half_space","params":{"dim":%d}}' % n)


def square(n: int = 2) -> DomainOracle:
    return _domain('{"kind":"rectangle","params":{"lo":%s,"hi":%s}}' % ([-1.0] * n, [1.0] * n))


def punctured_space(n: int = 2) -> DomainOracle:
    return _domain('{"kind":"punctured_space","params":{"center":%s}}' % ([0.0] * n))


def ball_complement(n: int, r: float) -> DomainOracle:
    return _domain('{"kind":"complement_closed_ball","params":{"center":%s,"radius":%r}}'
                   % ([0.0] * n, r))


def punctured_disk(n: int = 2) -> DomainOracle:
    return _domain('{"kind":"remove_points","params":{"points":[%s]},'
                   '"base":{"kind":"ball","params":{"center":%s,"radius":1.0}}}'
                   % ([0.0] * n, [0.0] * n))


def disk_minus_ball(n: int, r: float) -> DomainOracle:
    return _domain('{"kind":"remove_closed_ball","params":{"center":%s,"radius":%r},'
                   '"base":{"kind":"ball","params":{"center":%s,"radius":1.0}}}'
                   % ([0.0] * n, r, [0.0] * n))


def _norm(V):
    return np.sqrt(np.einsum("ij,ij->i", V, V))


def _dist(X, Y):
    return _norm(X - Y)


def _j(oracle, X, Y):
    return j_from_deltas(_dist(X, Y), oracle.delta_batch(X), oracle.delta_batch(Y))


def _box_nearest(P, half=1.0):
    """Nearest boundary point of the cube ``(-half, half)^n`` for interior points."""
    gap = half - np.abs(P)
    axis = np.argmin(gap, axis=1)
    rows = np.arange(P.shape[0])
    W = P.copy()
    W[rows, axis] = np.where(P[rows, axis] >= 0, half, -half)
    return W


def _all(cfg, params):
    return np.ones(next(iter(cfg.values())).shape[0], dtype=bool)


def _distinct(cfg, params):
    return _dist(cfg["x"], cfg["y"]) > 0


def _ball_pairs(st, params):
    n = params["n"]
    return {"x": st.uniform_ball(n), "y": st.uniform_ball(n)}


def _diameter_pairs(st, params):
    n = params["n"]
    e = st.unit_vectors(n)
    rs = 2.0 * st.uniform(2) - 1.0
    return {"x": rs[:, :1] * e, "y": rs[:, 1:] * e}


def _antipodal(params, radii=(0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99)):
    n = params["n"]
    e = np.zeros(n)
    e[0] = 1.0
    d = np.ones(n) / math.sqrt(n)
    X = np.array([r * v for r in radii for v in (e, d)])
    return {"x": X, "y": -X}


# --- distance ratio lower bound ------------------------------------------------

def _j_le_k_sampler(st, params):
    n = params["n"]
    lo = np.r_[-2.0 * np.ones(n - 1), 0.0]
    hi = 2.0 * np.ones(n)
    return {"x": st.uniform_box(lo, hi), "y": st.uniform_box(lo, hi)}


def _j_le_k_hyp(cfg, params):
    return (cfg["x"][:, -1] > 0) & (cfg["y"][:, -1] > 0) & _distinct(cfg, params)


def _j_le_k_assert(cfg, params, metrics):
    H = half_space(params["n"])
    X, Y = cfg["x"], cfg["y"]
    return [Part("j <= k", _j(H, X, Y), metrics.k_lower(H, X, Y))]


def _j_le_k_witness(params):
    # equality on a segment normal to the boundary: j = k = |log(x_n / y_n)|
    n = params["n"]
    H = half_space(n)
    s = np.array([0.01, 0.1, 0.5, 1.0, 3.0])
    X = np.zeros((s.size, n))
    Y = np.zeros((s.size, n))
    X[:, 0] = Y[:, 0] = 0.3
    X[:, -1] = s
    Y[:, -1] = 2.5 * s
    return [Part("j = k on a normal segment", _j(H, X, Y), rho_halfspace_batch(X, Y), "eq")]


# --- radial formulas in the ball -----------------------------------------------

def _radial_origin_sampler(st, params):
    return {"x": st.uniform_ball(params["n"])}


def _radial_origin_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X = cfg["x"]
    O = np.zeros_like(X)
    ref = -np.log1p(-_norm(X))
    return [
        Part("k(0,x) = log(1/(1-|x|))", metrics.k_lower(B, O, X), ref, "eq"),
        Part("j(0,x) = log(1/(1-|x|))", _j(B, O, X), ref, "eq"),
    ]


def _radial_common_sampler(st, params):
    n = params["n"]
    b = st.unit_vectors(n)
    u = st.uniform(2)
    r, s = np.minimum(u[:, 0], u[:, 1]), np.maximum(u[:, 0], u[:, 1])
    return {"x": r[:, None] * b, "y": s[:, None] * b, "r": r, "s": s}


def _radial_common_hyp(cfg, params):
    return (cfg["r"] > 0) & (cfg["r"] < cfg["s"])


def _radial_common_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    # log((1 - r) / (1 - s)) with r = |x|, s = |y| as realized in floating point
    ref = np.log1p(-_norm(X)) - np.log1p(-_norm(Y))
    return [
        Part("k(br,bs) = log((1-r)/(1-s))", metrics.k_lower(B, X, Y), ref, "eq"),
        Part("j(br,bs) = log((1-r)/(1-s))", _j(B, X, Y), ref, "eq"),
    ]


# --- nearest boundary segment --------------------------------------------------

def _segment_sampler(st, params):
    n = params["n"]
    z0 = st.uniform_box(-0.9 * np.ones(n), 0.9 * np.ones(n))
    ab = 0.9 * st.uniform(2)
    z = _box_nearest(z0)
    return {"z0": z0, "u": z0 + ab[:, :1] * (z - z0), "v": z0 + ab[:, 1:] * (z - z0)}


def _segment_hyp(cfg, params):
    return _dist(cfg["u"], cfg["v"]) > 0


def _segment_assert(cfg, params, metrics):
    G = square(params["n"])
    z0, U, V = cfg["z0"], cfg["u"], cfg["v"]
    du, dv = G.delta_batch(U), G.delta_batch(V)
    d0 = G.delta_batch(z0)
    via_z0 = np.abs(np.log((d0 - _dist(z0, U)) / (d0 - _dist(z0, V))))
    ref = np.abs(np.log(du / dv))
    return [
        Part("j(u,v) = |log(delta(u)/delta(v))|", _j(G, U, V), ref, "eq"),
        Part("k(u,v) = |log(delta(u)/delta(v))|", metrics.k_lower(G, U, V), ref, "eq"),
        Part("distance along [z0,z] form", via_z0, ref, "eq"),
    ]


# --- hyperbolic metric of the ball ---------------------------------------------

def _rho_j_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    rho = rho_ball_batch(X, Y)
    j = _j(B, X, Y)
    return [Part("j <= rho", j, rho), Part("rho <= 2j", rho, 2.0 * j)]


def _rho_j_witness(params):
    cfg = _antipodal(params)
    B = unit_ball(params["n"])
    return [Part("rho(x,-x) = 2 j(x,-x)", rho_ball_batch(cfg["x"], cfg["y"]),
                 2.0 * _j(B, cfg["x"], cfg["y"]), "eq")]


def _rho_k_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    rho = rho_ball_batch(X, Y)
    return [
        Part("rho/2 <= k", 0.5 * rho, metrics.k_lower(B, X, Y)),
        Part("k <= rho", metrics.k_upper(B, X, Y, rho + metrics.slack), rho, k_upper=True),
    ]


def _rho_identity_assert(cfg, params, metrics):
    X, Y = cfg["x"], cfg["y"]
    d = _dist(X, Y)
    t = np.sqrt((1.0 - np.einsum("ij,ij->i", X, X)) * (1.0 - np.einsum("ij,ij->i", Y, Y)))
    rho = rho_ball_batch(X, Y)
    h = np.sqrt(d * d + t * t)
    return [
        Part("tanh^2(rho/2) = |x-y|^2/(|x-y|^2+t^2)", np.tanh(rho / 2.0) ** 2, (d / h) ** 2, "eq"),
        Part("2 tanh(rho/4) = 2|x-y|/(sqrt(|x-y|^2+t^2)+t)", 2.0 * np.tanh(rho / 4.0),
             2.0 * d / (h + t), "eq"),
        Part("|x-y| <= 2 tanh(rho/4)", d, 2.0 * np.tanh(rho / 4.0)),
    ]


def _rho_identity_witness(params):
    cfg = _antipodal(params)
    X, Y = cfg["x"], cfg["y"]
    return [Part("|x-y| = 2 tanh(rho/4) at y = -x", _dist(X, Y),
                 2.0 * np.tanh(rho_ball_batch(X, Y) / 4.0), "eq")]


# --- comparisons inside small balls ----------------------------------------------

def _small_ball_sampler(st, params):
    n, s = params["n"], params["s"]
    return {"x": st.uniform_ball(n, s), "y": st.uniform_ball(n, s)}


def _small_ball_hyp(cfg, params):
    s = params["s"]
    return (_norm(cfg["x"]) < s) & (_norm(cfg["y"]) < s) & _distinct(cfg, params)


def _newlem1_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    j = _j(B, X, Y)
    rhs = (1.0 + params["s"]) * j
    return [
        Part("j <= k", j, metrics.k_lower(B, X, Y)),
        Part("k <= (1+s) j", metrics.k_upper(B, X, Y, rhs + metrics.slack), rhs, k_upper=True),
    ]


def _newlem2_sampler(st, params):
    n, s = params["n"], params["s"]
    G = square(n)
    w = st.uniform_box(-np.ones(n), np.ones(n))
    dw = G.delta_batch(w)
    w0 = _box_nearest(w)
    u = (w0 - w) / np.maximum(dw, 1e-300)[:, None]
    a = st.uniform(1)
    y = st.uniform_ball(n, s * dw, w)
    return {"w": w, "w0": w0, "x": w + (a * s * dw[:, None]) * u, "y": y}


def _newlem2_hyp(cfg, params):
    G = square(params["n"])
    s = params["s"]
    w, X, Y = cfg["w"], cfg["x"], cfg["y"]
    dw = G.delta_batch(w)
    dx, dy = G.delta_batch(X), G.delta_batch(Y)
    on_normal = np.abs(dx - _dist(X, cfg["w0"])) <= 1e-12 * np.maximum(1.0, dw)
    inside = (_dist(X, w) < s * dw) & (_dist(Y, w) < s * dw)
    return (dw > 0) & on_normal & inside & (dx <= dy) & _distinct(cfg, params)


def _newlem2_assert(cfg, params, metrics):
    G = square(params["n"])
    X, Y = cfg["x"], cfg["y"]
    rhs = (1.0 + params["s"]) * _j(G, X, Y)
    return [Part("k <= (1+s) j", metrics.k_upper(G, X, Y, rhs + metrics.slack), rhs,
                 k_upper=True)]


def _newlem3_sampler(st, params):
    n, s = params["n"], params["s"]
    w = st.uniform_box(-2.0 * np.ones(n), 2.0 * np.ones(n))
    dw = _norm(w)
    return {"w": w, "x": st.uniform_ball(n, s * dw, w), "y": st.uniform_ball(n, s * dw, w)}


def _newlem3_hyp(cfg, params):
    s = params["s"]
    w, X, Y = cfg["w"], cfg["x"], cfg["y"]
    dw = _norm(w)
    inside = (_dist(X, w) < s * dw) & (_dist(Y, w) < s * dw)
    return (dw > 0) & inside & (_norm(X) <= _norm(Y)) & _distinct(cfg, params)


def _newlem3_assert(cfg, params, metrics):
    G = punctured_space(params["n"])
    X, Y = cfg["x"], cfg["y"]
    rhs = (1.0 + params["s"]) * _j(G, X, Y)
    return [Part("k <= (1+s) j", metrics.k_upper(G, X, Y, rhs + metrics.slack), rhs,
                 k_upper=True)]


# --- Euclidean distance from k and j ---------------------------------------------

def _two_log(t):
    """``2 log(2 / (2 - t))``."""
    return -2.0 * np.log1p(-t / 2.0)


def _jung_k_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    t = _dist(X, Y)
    k = metrics.k_lower(B, X, Y)
    return [
        Part("2 log(2/(2-|x-y|)) <= k", _two_log(t), k),
        Part("|x-y| <= 2 log(2/(2-|x-y|))", t, _two_log(t)),
    ]


def _jung_k_witness(params):
    cfg = _antipodal(params)
    B = unit_ball(params["n"])
    k, _ = closed_form_k_batch(B, cfg["x"], cfg["y"])
    return [Part("k(x,-x) = 2 log(2/(2-|x-y|))", k, _two_log(_dist(cfg["x"], cfg["y"])), "eq")]


def _euclid_k_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    k = metrics.k_lower(B, X, Y)
    m = -2.0 * np.expm1(-k / 2.0)
    return [Part("|x-y| <= 2(1-exp(-k/2))", _dist(X, Y), m), Part("2(1-exp(-k/2)) <= k", m, k)]


def _euclid_k_witness(params):
    cfg = _antipodal(params)
    B = unit_ball(params["n"])
    k, _ = closed_form_k_batch(B, cfg["x"], cfg["y"])
    return [Part("|x-y| = 2(1-exp(-k/2)) at y = -x", _dist(cfg["x"], cfg["y"]),
                 -2.0 * np.expm1(-k / 2.0), "eq")]


def _bounded_ball_diameters(st, params):
    n, R = params["n"], params["R"]
    cfg = _diameter_pairs(st, params)
    return {"x": R * cfg["x"], "y": R * cfg["y"]}


def _jung_bounded_k_assert(cfg, params, metrics):
    n, R = params["n"], params["R"]
    G = unit_ball(n, R)
    r = jung_radius(n, 2.0 * R)
    X, Y = cfg["x"], cfg["y"]
    t = _dist(X, Y) / r
    k = metrics.k_lower(G, X, Y)
    m = -2.0 * np.expm1(-k / 2.0)
    return [
        Part("2 log(2/(2-t)) <= k", _two_log(t), k),
        Part("t <= 2 log(2/(2-t))", t, _two_log(t)),
        Part("t <= 2(1-exp(-k/2))", t, m),
        Part("2(1-exp(-k/2)) <= k", m, k),
    ]


def _centered_ball_witness(params, use_j):
    # G = B(z, r) with x, y = z -+ u: the lower bounds are attained when r is
    # the radius of the ball itself (not the Jung radius of its diameter)
    n, R = params["n"], params["R"]
    G = unit_ball(n, R)
    u = np.linspace(0.05, 0.95, 7)[:, None] * R * np.eye(n)[0]
    X, Y = -u, u
    t = _dist(X, Y) / R
    if use_j:
        return [Part("j = log((2+t)/(2-t)) for G = B(z,r)", _j(G, X, Y),
                     np.log((2.0 + t) / (2.0 - t)), "eq")]
    k, _ = closed_form_k_batch(G, X, Y)
    return [Part("k = 2 log(2/(2-t)) for G = B(z,r)", k, _two_log(t), "eq")]


def _jung_j_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    t = _dist(X, Y)
    j = _j(B, X, Y)
    lg = np.log((2.0 + t) / (2.0 - t))
    return [
        Part("log((2+t)/(2-t)) <= j", lg, j),
        Part("log((2+t)/(2-t)) = 2 artanh(t/2)", lg, 2.0 * np.arctanh(t / 2.0), "eq"),
        Part("t <= log((2+t)/(2-t))", t, lg),
    ]


def _jung_j_witness(params):
    cfg = _antipodal(params)
    B = unit_ball(params["n"])
    t = _dist(cfg["x"], cfg["y"])
    return [Part("j(x,-x) = log((2+t)/(2-t))", _j(B, cfg["x"], cfg["y"]),
                 np.log((2.0 + t) / (2.0 - t)), "eq")]


def _square_pairs(st, params):
    n = params["n"]
    return {"x": st.uniform_box(-np.ones(n), np.ones(n)),
            "y": st.uniform_box(-np.ones(n), np.ones(n))}


def _square_hyp(cfg, params):
    G = square(params["n"])
    return (G.delta_batch(cfg["x"]) > 0) & (G.delta_batch(cfg["y"]) > 0) & _distinct(cfg, params)


def _jung_j_bounded_assert(cfg, params, metrics):
    n = params["n"]
    G = square(n)
    r = jung_radius(n, 2.0 * math.sqrt(n))
    X, Y = cfg["x"], cfg["y"]
    t = _dist(X, Y) / r
    j = _j(G, X, Y)
    lg = np.log((2.0 + t) / (2.0 - t))
    return [Part("log((2+t)/(2-t)) <= j", lg, j), Part("t <= log((2+t)/(2-t))", t, lg)]


def _tanh_j_assert(cfg, params, metrics):
    B = unit_ball(params["n"])
    X, Y = cfg["x"], cfg["y"]
    j = _j(B, X, Y)
    m = 2.0 * np.tanh(j / 2.0)
    return [Part("|x-y| <= 2 tanh(j/2)", _dist(X, Y), m), Part("2 tanh(j/2) <= j", m, j)]


def _tanh_j_witness(params):
    cfg = _antipodal(params)
    B = unit_ball(params["n"])
    return [Part("|x-y| = 2 tanh(j/2) at y = -x", _dist(cfg["x"], cfg["y"]),
                 2.0 * np.tanh(_j(B, cfg["x"], cfg["y"]) / 2.0), "eq")]


def _tanh_j_bounded_assert(cfg, params, metrics):
    n = params["n"]
    G = square(n)
    r = jung_radius(n, 2.0 * math.sqrt(n))
    X, Y = cfg["x"], cfg["y"]
    j = _j(G, X, Y)
    m = 2.0 * np.tanh(j / 2.0)
    return [Part("|x-y|/r <= 2 tanh(j/2)", _dist(X, Y) / r, m), Part("2 tanh(j/2) <= j", m, j)]


# --- chordal metric ----------------------------------------------------------------

def _chordal_sampler(st, params):
    n = params["n"]
    return {"x": st.uniform_box(-2.0 * np.ones(n), 2.0 * np.ones(n)),
            "y": st.uniform_box(-2.0 * np.ones(n), 2.0 * np.ones(n))}


def _chordal_hyp(cfg, params):
    d = _dist(cfg["x"], cfg["y"])
    return (d > 0) & (d < 2.0)


def _chordal_assert(cfg, params, metrics):
    X, Y = cfg["x"], cfg["y"]
    q = chordal_batch(X, Y)
    t = _dist(X, Y)
    return [
        Part("2q/(1+sqrt(1-q^2)) <= |x-y|", 2.0 * q / (1.0 + np.sqrt(1.0 - q * q)), t),
        Part("q <= |x-y|/(1+(|x-y|/2)^2)", q, t / (1.0 + (t / 2.0) ** 2)),
    ]


def _chordal_witness(params):
    cfg = _antipodal(params)
    t = _dist(cfg["x"], cfg["y"])
    return [Part("q(x,-x) = |x-y|/(1+(|x-y|/2)^2)", chordal_batch(cfg["x"], cfg["y"]),
                 t / (1.0 + (t / 2.0) ** 2), "eq")]


# --- complement of a closed ball ---------------------------------------------------

def _sphere_pairs(st, params):
    n, R = params["n"], params["R"]
    return {"x": R * st.unit_vectors(n), "y": R * st.unit_vectors(n)}


def _sphere_hyp(cfg, params):
    return _distinct(cfg, params) & (params["R"] > params["r"])


def _complement_assert(cfg, params, metrics):
    n, r = params["n"], params["r"]
    G = ball_complement(n, r)
    X, Y = cfg["x"], cfg["y"]
    R = _norm(X)
    cos = np.clip(np.einsum("ij,ij->i", X, Y) / (R * _norm(Y)), -1.0, 1.0)
    theta = np.arccos(cos)
    mid = R * theta / (R - r)
    top = math.pi * _dist(X, Y) / (2.0 * (R - r))
    return [
        Part("k <= |x| angle/(|x|-r)", metrics.k_upper(G, X, Y, mid + metrics.slack), mid,
             k_upper=True),
        Part("|x| angle/(|x|-r) <= pi|x-y|/(2(|x|-r))", mid, top),
    ]


# --- elementary inequalities ---------------------------------------------------------

def _bernoulli_sampler(st, params):
    u = st.uniform(2)
    return {"a": 1.0 + 9.0 * u[:, 0], "t": np.exp(math.log(1e-6) + u[:, 1] * math.log(1e7))}


def _bernoulli_assert(cfg, params, metrics):
    a, t = cfg["a"], cfg["t"]
    return [Part("log(1+at) <= a log(1+t)", np.log1p(a * t), a * np.log1p(t))]


def _bernoulli_witness(params):
    t = np.geomspace(1e-6, 1e3, 10)
    return [Part("a = 1", np.log1p(1.0 * t), 1.0 * np.log1p(t), "eq")]


def _inversion_sampler(st, params):
    n = params["n"]
    box = 2.0 * np.ones(n)
    return {"a": st.uniform_box(-box / 2, box / 2), "r": 0.5 + 1.5 * st.uniform(1)[:, 0],
            "x": st.uniform_box(-box, box), "y": st.uniform_box(-box, box)}


def _inversion_hyp(cfg, params):
    lim = 0.1 * cfg["r"]
    return (_dist(cfg["x"], cfg["a"]) > lim) & (_dist(cfg["y"], cfg["a"]) > lim)


def _inversion_assert(cfg, params, metrics):
    a, r, X, Y = cfg["a"], cfg["r"], cfg["x"], cfg["y"]
    hx = np.array([inversion_map(a[i], r[i], X[i]) for i in range(X.shape[0])]).reshape(X.shape)
    hy = np.array([inversion_map(a[i], r[i], Y[i]) for i in range(Y.shape[0])]).reshape(Y.shape)
    rhs = r * r * _dist(X, Y) / (_dist(X, a) * _dist(Y, a))
    return [Part("|h(x)-h(y)| = r^2|x-y|/(|x-a||y-a|)", _dist(hx, hy), rhs, "eq")]


# --- point and ball removal ----------------------------------------------------------

def _annulus_pairs(st, params):
    n, rin = params["n"], params["inner"]
    out = []
    for _ in range(2):
        # radius with density proportional to rho^(n-1) on (rin, 1)
        u = st.uniform(1)[:, 0]
        rho = (rin ** n + u * (1.0 - rin ** n)) ** (1.0 / n)
        out.append(rho[:, None] * st.unit_vectors(n))
    return {"x": out[0], "y": out[1]}


def _annulus_hyp(cfg, params):
    rin = params["inner"]
    nx, ny = _norm(cfg["x"]), _norm(cfg["y"])
    return (nx >= rin) & (ny >= rin) & (nx < 1.0) & (ny < 1.0) & _distinct(cfg, params)


def _vu2_params(params):
    return dict(params, inner=params["theta"])


def _vu2_sampler(st, params):
    return _annulus_pairs(st, _vu2_params(params))


def _vu2_hyp(cfg, params):
    return _annulus_hyp(cfg, _vu2_params(params))


def _vu2_assert(cfg, params, metrics):
    n, theta = params["n"], params["theta"]
    G = unit_ball(n)
    Gz = punctured_disk(n)
    X, Y = cfg["x"], cfg["y"]
    rhs = a_theta(theta) * _j(G, X, Y)
    return [Part("k(G minus z) <= a(theta) k(G)", metrics.k_upper(Gz, X, Y, rhs + metrics.slack),
                 rhs, k_upper=True)]


def _genvu2_assert(cfg, params, metrics):
    n, theta, alpha = params["n"], params["theta"], params["alpha"]
    G = unit_ball(n)
    Gp = disk_minus_ball(n, alpha * theta)
    X, Y = cfg["x"], cfg["y"]
    rhs = a_alpha_theta(alpha, theta) * _j(G, X, Y)
    return [Part("k(G') <= a(alpha,theta) k(G)", metrics.k_upper(Gp, X, Y, rhs + metrics.slack),
                 rhs, k_upper=True)]


def _convex_assert(cfg, params, metrics):
    G = square(params["n"])
    X, Y = cfg["x"], cfg["y"]
    t = _dist(X, Y) / np.minimum(G.delta_batch(X), G.delta_batch(Y))
    rhs = t * (1.0 + params["rel"])
    return [Part("k <= t (convex domain)", metrics.k_upper(G, X, Y, rhs + metrics.slack), rhs,
                 k_upper=True)]


# --- the catalog -----------------------------------------------------------------------

def _entries():
    B2 = {"n": 2}
    return [
        BoundSpec("j_le_k",
                  "distance ratio lower bound: k_G(x,y) >= log(1 + L/min(delta)) >= j_G(x,y)",
                  "x, y uniform in [-2,2]^(n-1) x (0,2) of the upper half-space",
                  _j_le_k_sampler, _j_le_k_hyp, _j_le_k_assert, "closed", _j_le_k_witness, B2),
        BoundSpec("radial_origin",
                  "radial distance from the origin: k_B(0,x) = j_B(0,x) = log(1/(1-|x|))",
                  "x uniform in the unit ball", _radial_origin_sampler, _all,
                  _radial_origin_assert, "closed", None, B2),
        BoundSpec("radial_common",
                  "common radius: k_B(br,bs) = j_B(br,bs) = log((1-r)/(1-s)), 0 < r < s < 1",
                  "b uniform on the sphere, r < s order statistics of two uniforms on (0,1)",
                  _radial_common_sampler, _radial_common_hyp, _radial_common_assert, "closed",
                  None, B2),
        BoundSpec("segment_to_boundary",
                  "nearest-boundary segment: k_G(u,v) = j_G(u,v) = |log(delta(u)/delta(v))| "
                  "for u, v on [z0, z], delta(z0) = |z0 - z|",
                  "G = (-1,1)^n, z0 uniform in [-0.9,0.9]^n, u, v at fractions in [0,0.9) of "
                  "[z0, z] (constructed)",
                  _segment_sampler, _segment_hyp, _segment_assert, "closed", None, B2),
        BoundSpec("rho_j_sandwich",
                  "ball: j_B(x,y) <= rho_B(x,y) <= 2 j_B(x,y), equality on the right at y = -x",
                  "x, y uniform in the unit ball", _ball_pairs, _distinct, _rho_j_assert,
                  "closed", _rho_j_witness, B2),
        BoundSpec("rho_k_sandwich",
                  "ball: rho_B(x,y)/2 <= k_B(x,y) <= rho_B(x,y) (closed form along diameters)",
                  "b uniform on the sphere, x = r b, y = s b with r, s uniform in (-1,1)",
                  _diameter_pairs, _distinct, _rho_k_assert, "closed", None, B2),
        BoundSpec("rho_k_sandwich_general",
                  "ball: rho_B(x,y)/2 <= k_B(x,y) <= rho_B(x,y) for arbitrary pairs",
                  "x, y uniform in the unit ball", _ball_pairs, _distinct, _rho_k_assert,
                  "numeric", None, B2),
        BoundSpec("newlem1",
                  "small concentric ball: j_B(x,y) <= k_B(x,y) <= (1+s) j_B(x,y), x, y in B(s)",
                  "x, y uniform in B(0, s)", _small_ball_sampler, _small_ball_hyp,
                  _newlem1_assert, "numeric", None, {"n": 2, "s": 0.9}),
        BoundSpec("newlem2",
                  "ball around w: k_G(x,y) <= (1+s) j_G(x,y) when x, y in B(w, s delta(w)) and "
                  "delta(x) = |x - w0| <= delta(y)",
                  "G = (-1,1)^n, w uniform in G, w0 its nearest boundary point, x on [w, w0] "
                  "inside B(w, s delta(w)) (constructed), y uniform in B(w, s delta(w))",
                  _newlem2_sampler, _newlem2_hyp, _newlem2_assert, "numeric", None,
                  {"n": 2, "s": 0.5}),
        BoundSpec("newlem3",
                  "punctured space: k_G(x,y) <= (1+s) j_G(x,y) for |x| <= |y| in B(w, s|w|)",
                  "G = R^n minus 0, w uniform in [-2,2]^n, x, y uniform in B(w, s|w|)",
                  _newlem3_sampler, _newlem3_hyp, _newlem3_assert, "numeric", None,
                  {"n": 2, "s": 0.5}),
        BoundSpec("rhoineq",
                  "ball: tanh^2(rho/2) = |x-y|^2/(|x-y|^2+t^2) and |x-y| <= 2 tanh(rho/4), "
                  "equality at y = -x",
                  "x, y uniform in the unit ball", _ball_pairs, _distinct, _rho_identity_assert,
                  "closed", _rho_identity_witness, B2),
        BoundSpec("jung_appl_1",
                  "diameter of the ball: k_B(x,y) >= 2 log(2/(2-|x-y|)) >= |x-y|, equality at "
                  "y = -x",
                  "b uniform on the sphere, x = r b, y = s b with r, s uniform in (-1,1)",
                  _diameter_pairs, _distinct, _jung_k_assert, "closed", _jung_k_witness, B2),
        BoundSpec("jung_appl_2",
                  "Euclidean distance from k in the ball: |x-y| <= 2(1-exp(-k_B/2)) <= k_B, "
                  "equality at y = -x (closed form along diameters)",
                  "b uniform on the sphere, x = r b, y = s b with r, s uniform in (-1,1)",
                  _diameter_pairs, _distinct, _euclid_k_assert, "closed", _euclid_k_witness, B2),
        BoundSpec("jung_appl_3",
                  "bounded domain, r = sqrt(n/(2n+2)) diam: k_G >= 2 log(2/(2-t)) >= t and "
                  "t <= 2(1-exp(-k_G/2)) <= k_G, t = |x-y|/r; equality for G = B((x+y)/2, r)",
                  "G = B(0, R), pairs on a diameter of G; the witness uses r = radius of G",
                  _bounded_ball_diameters, _distinct, _jung_bounded_k_assert, "closed",
                  lambda p: _centered_ball_witness(p, use_j=False), {"n": 2, "R": 1.0}),
        BoundSpec("jung_appl_j_2",
                  "ball: j_B(x,y) >= log((2+t)/(2-t)) = 2 artanh(t/2) >= t, t = |x-y|, equality "
                  "at y = -x",
                  "x, y uniform in the unit ball", _ball_pairs, _distinct, _jung_j_assert,
                  "closed", _jung_j_witness, B2),
        BoundSpec("jung_appl_j_3",
                  "bounded domain, r = sqrt(n/(2n+2)) diam: j_G >= log((2+t)/(2-t)) >= t, "
                  "t = |x-y|/r; equality for G = B((x+y)/2, r)",
                  "G = (-1,1)^n, x, y uniform in G; the witness uses G = B(0, R) with r = R",
                  _square_pairs, _square_hyp, _jung_j_bounded_assert, "closed",
                  lambda p: _centered_ball_witness(p, use_j=True), {"n": 2, "R": 1.0}),
        BoundSpec("jung_tanh_j",
                  "Euclidean distance from j in the ball: |x-y| <= 2 tanh(j_B/2) <= j_B, equality "
                  "at y = -x",
                  "x, y uniform in the unit ball", _ball_pairs, _distinct, _tanh_j_assert,
                  "closed", _tanh_j_witness, B2),
        BoundSpec("jung_tanh_j_bounded",
                  "bounded domain: |x-y|/r <= 2 tanh(j_G/2) <= j_G, r = sqrt(n/(2n+2)) diam",
                  "G = (-1,1)^n, x, y uniform in G", _square_pairs, _square_hyp,
                  _tanh_j_bounded_assert, "closed", None, B2),
        BoundSpec("chordal",
                  "chordal metric: q(x,y) <= |x-y|/(1+(|x-y|/2)^2) for |x-y| < 2, equality at "
                  "y = -x",
                  "x, y uniform in [-2,2]^n, kept when |x-y| < 2", _chordal_sampler,
                  _chordal_hyp, _chordal_assert, "closed", _chordal_witness, B2),
        BoundSpec("complementofB",
                  "outside a closed ball, |x| = |y|: k_G(x,y) <= |x| angle(x,y)/(|x|-r) <= "
                  "pi |x-y|/(2(|x|-r))",
                  "G = R^n minus closed B(0, r), x, y uniform on the sphere |z| = R "
                  "(constructed)",
                  _sphere_pairs, _sphere_hyp, _complement_assert, "numeric", None,
                  {"n": 2, "r": 1.0, "R": 2.0}),
        BoundSpec("bernoulli",
                  "log(1 + a t) <= a log(1 + t) for a >= 1, t >= 0; equality for a = 1",
                  "a uniform in [1,10], t log-uniform in [1e-6, 10]", _bernoulli_sampler, _all,
                  _bernoulli_assert, "closed", _bernoulli_witness, {}),
        BoundSpec("inversion",
                  "inversion h in S(a,r): |h(x)-h(y)| = r^2 |x-y| / (|x-a| |y-a|)",
                  "a uniform in [-1,1]^n, r uniform in [0.5,2], x, y uniform in [-2,2]^n with "
                  "|x-a|, |y-a| > r/10",
                  _inversion_sampler, _inversion_hyp, _inversion_assert, "closed", None, B2),
        BoundSpec("vu2_puncture",
                  "removing a point z: k_(G minus z)(x,y) <= a(theta) k_G(x,y) for x, y outside "
                  "B(z, theta delta(z)); a(theta) = 1 + 2/theta + pi/(2 log((2+2theta)/(2+theta)))",
                  "G = unit ball, z = 0, x, y uniform in the annulus theta < |x| < 1",
                  _vu2_sampler, _vu2_hyp, _vu2_assert, "numeric", None,
                  {"n": 2, "theta": 0.5}),
        BoundSpec("gen_vu2",
                  "removing a closed ball B(z, alpha theta delta(z)): k_G'(x,y) <= "
                  "a(alpha,theta) k_G(x,y) for x, y outside B(z, theta delta(z))",
                  "G = unit ball, z = 0, x, y uniform in the annulus theta < |x| < 1",
                  _vu2_sampler, _vu2_hyp, _genvu2_assert, "numeric", None,
                  {"n": 2, "theta": 0.5, "alpha": 0.2}),
        BoundSpec("convex_modulus",
                  "convex domains are phi-uniform with phi(t) = t: k_G(x,y) <= |x-y|/min(delta)",
                  "G = (-1,1)^n, x, y uniform in G; rhs relaxed by the factor 1 + rel",
                  _square_pairs, _square_hyp, _convex_assert, "numeric", None,
                  {"n": 2, "rel": 0.05}),
    ]


def catalog() -> list[BoundSpec]:
    """Every catalogued bound, in a fixed order."""
    return _entries()


def get_bound(name: str, **params) -> BoundSpec:
    for spec in _entries():
        if spec.name == name:
            return spec.with_params(**params) if params else spec
    raise InvalidSpec(f"unknown bound '{name}'")


def closed_bounds() -> list[BoundSpec]:
    return [b for b in _entries() if b.backend == "closed"]


def draw(spec: BoundSpec, seed: int, start: int, count: int, keys=()) -> dict:
    """Configurations ``start .. start + count - 1`` of ``spec`` for ``seed``."""
    st = StreamBatch(seed, count, name_key("bound"), name_key(spec.name), *keys, start=start)
    return spec.sampler(st, spec.params)
