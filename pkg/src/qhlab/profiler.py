"""Empirical phi-uniformity: envelopes, uniformity constants and divergent sequences.

Envelopes are per-bin suprema of ``k_hat`` over sampled pairs.  They are
lower estimates of the true modulus (finitely many pairs, and ``k_hat``
approximates ``k`` from above only per pair), so comparing them against a
theorem's upper bound is a check in the sound direction.

The supremum over a bin is computed exactly without solving every pair:
pairs are visited by decreasing straight-segment cost ``U`` (an upper
bound of ``k_hat``), each solve is asked to stop as soon as it drops to the
current maximum ``M`` (a run that would end above ``M`` never stops early, so
it returns the untargeted ``k_hat``), and the scan ends once ``U <= M``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .closed_form import j_from_deltas
from .errors import AxisMismatch, BudgetExceeded, InvalidSpec
from .geometry.domains import DomainOracle, make_domain
from .geometry.sampling import _parse_region, default_region, sample_pairs
from .solver.core import DEFAULT_CONFIG, FINAL_QUAD_TOL, SEGMENT_REL, SolverConfig, k_distance
from .solver.quadrature import segments_inside, simpson_costs

AXES = ("ratio", "j_value")
EXAMPLES = ("half_strip", "exp_cusp", "revolution", "comb")
DEFAULT_BINS = 40
MIN_DELTA_FRACTION = 1e-6
COMB_PAIRS = 256
# refinement levels per sequence example: every k_hat is an upper estimate,
# so a shorter ladder keeps the divergence check sound while bounding runtime
SEQUENCE_LEVELS = {"exp_cusp": 4, "revolution": 3}

# the constant value of j along each divergent sequence
J_CONSTANTS = {
    "half_strip": math.log(5.0),
    "exp_cusp": math.log(3.0),
    "revolution": math.log1p(2.0 * math.sqrt(2.0)),
}


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


# --- cheap upper bounds ----------------------------------------------------------

def segment_upper(oracle: DomainOracle, X, Y, dX=None, dY=None) -> np.ndarray:
    """Straight-segment costs, ``inf`` where the segment leaves the domain."""
    dX = oracle.delta_batch(X) if dX is None else dX
    dY = oracle.delta_batch(Y) if dY is None else dY
    ok = segments_inside(oracle, X, Y, dX, dY)
    U = np.full(X.shape[0], np.inf)
    if ok.any():
        U[ok] = simpson_costs(oracle, X[ok], Y[ok], dX[ok], dY[ok], tol=FINAL_QUAD_TOL,
                                 rel=SEGMENT_REL)
    return U


def _pruned_max(oracle, X, Y, U, weight, tol, config):
    """Exact ``max_i k_hat_i / weight_i`` with upper bounds ``U_i`` on ``k_hat_i``.

    Returns ``(value, index, k_hat, solves, failures)``.
    """
    order = np.argsort(-(U / weight), kind="stable")
    best, arg, kbest = -math.inf, -1, math.nan
    solves = failures = 0
    for i in order:
        if U[i] / weight[i] <= best:
            break
        target = best * weight[i] if math.isfinite(best) else None
        try:
            v = k_distance(oracle, X[i], Y[i], tol, method="auto", target=target,
                           config=config).value
        except BudgetExceeded:
            failures += 1
            continue
        solves += 1
        if v / weight[i] > best:
            best, arg, kbest = v / weight[i], int(i), v
    return best, arg, kbest, solves, failures


# --- envelopes ---------------------------------------------------------------------

@dataclass
class PhiProfile:
    """Per-bin suprema of ``k_hat`` against the ratio ``|x-y|/min(delta)`` or against ``j``.

    ``envelope`` holds the raw per-bin suprema (NaN for empty bins) and
    ``rectified`` their running maximum; ``t_max`` is the largest abscissa
    observed in each bin.  The envelope is a lower estimate of the true
    modulus.
    """

    axis: str
    edges: np.ndarray
    envelope: np.ndarray
    rectified: np.ndarray
    counts: np.ndarray
    t_max: np.ndarray
    tol: float
    samples: int
    seed: int
    rejected: int = 0
    skipped: int = 0
    failures: int = 0
    solves: int = 0
    domain: dict = field(default_factory=dict)
    predicted: np.ndarray | None = None

    @property
    def accepted(self) -> int:
        return int(self.counts.sum())

    def nonempty(self) -> np.ndarray:
        return self.counts > 0

    def step(self, t, inclusive: bool = True) -> float:
        """Largest raw supremum over bins lying left of ``t``.

        With ``inclusive`` the bin containing ``t`` counts (an upper
        reading); otherwise only bins whose upper edge is ``<= t`` do.
        """
        hi = self.edges[1:] if not inclusive else self.edges[:-1]
        sel = (hi <= t) & self.nonempty()
        return float(np.max(self.envelope[sel])) if sel.any() else math.nan

    def rows(self):
        for b in range(self.counts.size):
            row = [self.edges[b], self.edges[b + 1], int(self.counts[b]), self.envelope[b],
                   self.rectified[b], self.t_max[b]]
            if self.predicted is not None:
                row.append(self.predicted[b])
            yield row

    def to_csv(self) -> str:
        header = ["bin_lo", "bin_hi", "count", "sup_k", "rectified_sup", "t_max"]
        if self.predicted is not None:
            header.append("predicted")
        return _write_csv(header, self.rows())

    def to_dict(self) -> dict:
        bins = []
        for r in self.rows():
            d = {"bin_lo": _num(r[0]), "bin_hi": _num(r[1]), "count": r[2], "sup_k": _num(r[3]),
                 "rectified_sup": _num(r[4]), "t_max": _num(r[5])}
            if self.predicted is not None:
                d["predicted"] = _num(r[6])
            bins.append(d)
        return {
            "axis": self.axis,
            "domain": self.domain,
            "samples": self.samples,
            "accepted": self.accepted,
            "rejected_near_boundary": self.rejected,
            "skipped_coincident": self.skipped,
            "solver_failures": self.failures,
            "solves": self.solves,
            "seed": self.seed,
            "tol": self.tol,
            "lower_estimate": True,
            "bins": bins,
        }


def _bin_job(args):
    spec, X, Y, U, tol, config = args
    oracle = make_domain(spec)
    return _pruned_max(oracle, X, Y, U, np.ones(X.shape[0]), tol, config)


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _prepared_pairs(oracle, pairs, seed, region):
    if pairs <= 0:
        raise InvalidSpec("pairs must be positive")
    reg = region if region is not None else default_region(oracle)
    lo, hi = _parse_region(reg, oracle.dimension)
    X, Y = sample_pairs(oracle, pairs, seed, (lo, hi))
    dX, dY = oracle.delta_batch(X), oracle.delta_batch(Y)
    floor = MIN_DELTA_FRACTION * float(np.linalg.norm(hi - lo))
    keep = np.minimum(dX, dY) >= floor
    rejected = int((~keep).sum())
    dist = np.linalg.norm(X - Y, axis=1)
    nz = dist > 0
    skipped = int((keep & ~nz).sum())
    keep &= nz
    return X[keep], Y[keep], dX[keep], dY[keep], dist[keep], rejected, skipped


def phi_envelope(oracle: DomainOracle, pairs: int, bins: int = DEFAULT_BINS, seed: int = 0,
                 axis: str = "ratio", region=None, tol: float = 1e-2, workers: int = 1,
                 config: SolverConfig = DEFAULT_CONFIG, edges=None) -> PhiProfile:
    """Sample pairs and bin ``k_hat`` by ``|x-y|/min(delta)`` (``ratio``) or by ``j`` (``j_value``).

    Bins are ``bins`` log-spaced intervals spanning the observed abscissae
    unless ``edges`` is given.  Pairs with ``min(delta)`` below ``1e-6``
    times the region diameter are rejected and counted.
    """
    if axis not in AXES:
        raise AxisMismatch(f"unknown axis '{axis}'; expected one of {AXES}")
    if bins <= 0:
        raise InvalidSpec("bins must be positive")
    X, Y, dX, dY, dist, rejected, skipped = _prepared_pairs(oracle, pairs, seed, region)
    ratio = dist / np.minimum(dX, dY)
    t = ratio if axis == "ratio" else np.log1p(ratio)
    if edges is None:
        if t.size == 0:
            raise InvalidSpec("no usable pairs were sampled")
        lo, hi = float(t.min()), float(t.max())
        if hi <= lo:
            hi = lo * (1.0 + 1e-12) + 1e-300
        edges = np.geomspace(lo, hi, bins + 1)
    edges = np.asarray(edges, float)
    nb = edges.size - 1
    which = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, nb - 1)
    inside = (t >= edges[0]) & (t <= edges[-1])
    U = segment_upper(oracle, X, Y, dX, dY)
    jobs, owners = [], []
    for b in range(nb):
        sel = np.flatnonzero(inside & (which == b))
        if sel.size:
            jobs.append((oracle.spec, X[sel], Y[sel], U[sel], tol, config))
            owners.append((b, sel))
    results = _map(_bin_job, jobs, workers)
    env = np.full(nb, np.nan)
    tmax = np.full(nb, np.nan)
    counts = np.zeros(nb, dtype=int)
    solves = failures = 0
    for (b, sel), (value, arg, _, s, f) in zip(owners, results):
        counts[b] = sel.size
        tmax[b] = float(t[sel].max())
        env[b] = value if arg >= 0 else np.nan
        solves += s
        failures += f
    rect = np.full(nb, np.nan)
    run = -math.inf
    for b in range(nb):
        if not math.isnan(env[b]):
            run = max(run, env[b])
        if math.isfinite(run):
            rect[b] = run
    return PhiProfile(axis, edges, env, rect, counts, tmax, tol, pairs, seed, rejected, skipped,
                      failures, solves, oracle.spec.to_dict())


@dataclass
class UniformityEstimate:
    """``C_hat = max k_hat / j`` over sampled pairs, a lower estimate of the uniformity constant."""

    value: float
    x: list
    y: list
    k_hat: float
    j: float
    samples: int
    used: int
    solves: int
    lower_estimate: bool = True

    def __float__(self) -> float:
        return float(self.value)


def uniformity_constant(oracle: DomainOracle, pairs: int, seed: int = 0, tol: float = 1e-2,
                        region=None, config: SolverConfig = DEFAULT_CONFIG) -> UniformityEstimate:
    """Largest ``k_hat / j`` over sampled pairs; pairs with ``j = 0`` are skipped."""
    X, Y, dX, dY, dist, _, _ = _prepared_pairs(oracle, pairs, seed, region)
    j = j_from_deltas(dist, dX, dY)
    pos = j > 0
    X, Y, dX, dY, j = X[pos], Y[pos], dX[pos], dY[pos], j[pos]
    if j.size == 0:
        raise InvalidSpec("no usable pairs were sampled")
    U = segment_upper(oracle, X, Y, dX, dY)
    value, arg, khat, solves, _ = _pruned_max(oracle, X, Y, U, j, tol, config)
    if arg < 0:
        raise BudgetExceeded("no pair could be solved")
    return UniformityEstimate(float(value), X[arg].tolist(), Y[arg].tolist(), float(khat),
                              float(j[arg]), pairs, int(j.size), solves)


# --- comparison with a predicted modulus ---------------------------------------------

@dataclass
class EnvelopeComparison:
    """Per-bin ``predicted(t_max) - envelope``; passes iff every margin is ``>= -tol``."""

    rows: list
    skipped_bins: list
    tol: float
    passed: bool
    min_margin: float

    def to_dict(self) -> dict:
        return {"pass": self.passed, "tol": self.tol, "min_margin": _num(self.min_margin),
                "skipped_bins": self.skipped_bins, "bins": self.rows}


def envelope_vs_theorem(profile: PhiProfile, predicted, tol: float | None = None
                        ) -> EnvelopeComparison:
    """Compare a ratio-axis envelope with a theorem's modulus.

    Each bin is compared at its largest observed ratio ``t_max``: every pair
    in the bin has ``k <= phi(t_i) <= phi(t_max)`` under the theorem.  Empty
    bins are listed in ``skipped_bins``.
    """
    if profile.axis != "ratio":
        raise AxisMismatch("theorem moduli are functions of |x-y|/min(delta); use a ratio profile")
    tol = profile.tol if tol is None else tol
    rows, skipped = [], []
    worst = math.inf
    pred = np.full(profile.counts.size, np.nan)
    for b in range(profile.counts.size):
        if profile.counts[b] == 0 or math.isnan(profile.envelope[b]):
            skipped.append(b)
            continue
        p = float(predicted(profile.t_max[b]))
        pred[b] = p
        m = p - float(profile.envelope[b])
        worst = min(worst, m)
        rows.append({"bin": b, "bin_lo": float(profile.edges[b]),
                     "bin_hi": float(profile.edges[b + 1]), "t_max": float(profile.t_max[b]),
                     "sup_k": float(profile.envelope[b]), "predicted": p, "margin": m})
    profile.predicted = pred
    return EnvelopeComparison(rows, skipped, tol, bool(worst >= -tol), worst)


# --- divergent sequences ---------------------------------------------------------------

@dataclass
class SequenceRow:
    n: int
    x: list
    y: list
    j_exact: float
    j_constant: float
    j_matches: bool
    k_hat: float
    k_err: float
    k_lower: float
    paper_lower_bound: float
    status: str = "ok"

    @property
    def bracket_ok(self):
        """Whether the lower bracket alone already exceeds the predicted divergent bound."""
        if math.isnan(self.paper_lower_bound):
            return None
        return bool(self.k_lower >= self.paper_lower_bound)

    @property
    def ratio(self) -> float:
        return self.k_hat / self.j_exact if self.j_exact > 0 else math.nan


@dataclass
class SequenceReport:
    """One row per index ``n``: ``j`` from the domain, ``k_hat`` with its bracket, and the predicted bound.

    ``k_lower`` is the larger of ``j`` and a separation bound: every path
    joining the two points crosses a set ``S`` (a half-line or half-plane the
    domain pinches around), so ``k >= log(1 + d(z, S) / delta(z))``.
    """

    example: str
    rows: list
    tol: float
    n_max: int

    COLUMNS = ("n", "j_exact", "k_hat", "k_err", "paper_lower_bound", "k_lower", "ratio",
               "j_constant", "j_matches", "bracket_ok", "status")

    def to_csv(self) -> str:
        return _write_csv(self.COLUMNS, ([getattr(r, c) for c in self.COLUMNS] for r in self.rows))

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            d = {}
            for c in self.COLUMNS:
                v = getattr(r, c)
                d[c] = v if v is None or isinstance(v, (str, bool, int)) else _num(v)
            d["x"], d["y"] = r.x, r.y
            rows.append(d)
        return {"example": self.example, "n_max": self.n_max, "tol": self.tol, "rows": rows}


def _separation_bound(oracle, z, w, dist_to_cut):
    """``max`` over both endpoints of ``log(1 + d(p, S) / delta(p))``."""
    return max(math.log1p(dist_to_cut(p) / oracle.delta(p)) for p in (z, w))


def _sequence_setup(example):
    if example == "half_strip":
        oracle = make_domain({"kind": "half_strip", "params": {"half_width": 1.0,
                                                                "complement": True}})

        def points(n):
            return np.array([n, -2.0]), np.array([n, 2.0])

        def cut(p):  # S = {(s, 0): s <= 0}
            return math.hypot(max(p[0], 0.0), p[1])

        return oracle, points, cut, lambda n: math.log1p(n), None
    if example == "exp_cusp":
        oracle = make_domain({"kind": "exp_cusp_complement", "params": {"rate": 1.0}})

        def points(n):
            e = math.exp(-n)
            return np.array([n, -e]), np.array([n, e])

        def cut(p):  # S = {(s, 0): s < 0}
            return math.hypot(max(p[0], 0.0), p[1])

        def region(n):  # a box reaching past the cusp tip, where paths must turn
            half = 0.5 * n + 2.0
            return [0.5 * n - half, -half], [0.5 * n + half, half]

        return oracle, points, cut, lambda n: math.log1p(n * math.exp(n)), region
    if example == "revolution":
        oracle = make_domain({"kind": "revolved_triangle", "params": {"complement": True}})

        def points(n):
            t = 2.0 ** -n
            return np.array([0.0, -t, 0.0]), np.array([0.0, t, 0.0])

        def cut(p):  # S = {h = 0, r >= 1} with h the axis coordinate
            r = math.hypot(p[0], p[2])
            return math.hypot(max(1.0 - r, 0.0), p[1])

        def region(n):  # paths must pass outside the unit cylinder
            return [-2.5, -2.5, -2.5], [2.5, 2.5, 2.5]

        return oracle, points, cut, lambda n: math.log1p(math.sqrt(2.0) * 2.0 ** n), region
    raise InvalidSpec(f"unknown example '{example}'; expected one of {EXAMPLES}")


def _sequence_row(example, n, tol, config):
    oracle, points, cut, lower, region = _sequence_setup(example)
    z, w = points(n)
    dz, dw = oracle.delta(z), oracle.delta(w)
    j = float(j_from_deltas(float(np.linalg.norm(z - w)), dz, dw))
    c = J_CONSTANTS[example]
    sep = _separation_bound(oracle, z, w, cut)
    row = SequenceRow(n, z.tolist(), w.tolist(), j, c, abs(j - c) <= 4.0 * math.ulp(c),
                      math.nan, math.nan, max(j, sep), lower(n))
    try:
        res = k_distance(oracle, z, w, tol, method="numeric",
                         region=None if region is None else region(n), config=config)
        row.k_hat, row.k_err = res.value, res.error_bound
        if not res.converged:
            row.status = "not_converged"
    except BudgetExceeded:
        row.status = "budget_exceeded"
    return row


def _comb_row(n, tol, seed, config):
    oracle = make_domain({"kind": "comb_square", "params": {"k": n, "n": n + 2}})
    try:
        est = uniformity_constant(oracle, COMB_PAIRS, seed, tol, config=config)
    except BudgetExceeded:
        return SequenceRow(n, [], [], math.nan, math.nan, False, math.nan, math.nan, math.nan,
                           math.nan, "budget_exceeded")
    return SequenceRow(n, est.x, est.y, est.j, math.nan, False, est.k_hat, math.nan, est.j,
                       math.nan)


def _row_job(args):
    example, n, tol, seed, config = args
    if example == "comb":
        return _comb_row(n, tol, seed, config)
    return _sequence_row(example, n, tol, config)


def divergence_sequence(example: str, n_max: int, tol: float = 1e-2, seed: int = 0,
                        n_min: int = 1, workers: int = 1,
                        config: SolverConfig | None = None) -> SequenceReport:
    """Evaluate ``j`` and ``k_hat`` along a sequence of pairs exhibiting non-uniformity.

    * ``half_strip``: ``z_n = (n, -2)``, ``w_n = (n, 2)`` outside the closed
      half-strip ``{x >= 0, |y| <= 1}``; ``j = log 5``, ``k >= log(1 + n)``.
    * ``exp_cusp``: ``z_n = (n, -e^-n)``, ``w_n = (n, e^-n)`` outside the
      closed cusp ``|y| <= exp(-1 - x)``; ``k >= log(1 + n e^n)``.
    * ``revolution``: ``-+ t e_2`` with ``t = 2^-n`` outside the solid
      obtained by revolving the triangle ``(1,-1), (0,0), (1,1)`` about the
      ``e_2`` axis; ``j = log(1 + 2 sqrt 2)``, ``k >= log(1 + sqrt 2 / t)``.
    * ``comb``: the unit square minus ``4(k+1)`` points clustered at
      ``(1 - 2^-m, 1 - 2^-m)``; row ``n`` uses ``k = n`` and reports the
      sampled uniformity constant (``ratio``) and its maximizing pair.

    A row whose solve exceeds the budget is reported with that status
    instead of failing the sequence.  Without ``config`` the refinement
    ladder is capped per example (:data:`SEQUENCE_LEVELS`); rows that stop
    before the refinement test passes carry status ``not_converged``.
    """
    if example not in EXAMPLES:
        raise InvalidSpec(f"unknown example '{example}'; expected one of {EXAMPLES}")
    if n_max < 2:
        raise InvalidSpec("n_max must be at least 2")
    if config is None:
        config = DEFAULT_CONFIG
        if example in SEQUENCE_LEVELS:
            config = replace(config, max_levels=SEQUENCE_LEVELS[example])
    jobs = [(example, n, tol, seed, config) for n in range(n_min, n_max + 1)]
    rows = _map(_row_job, jobs, workers)
    return SequenceReport(example, rows, tol, n_max)
