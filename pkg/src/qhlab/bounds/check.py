"""Seeded evaluation of catalogued bounds.

Configurations are processed in fixed chunks of :data:`CHUNK` samples.  A
chunk depends only on ``(seed, bound, chunk index)``, so chunks can be
evaluated by any number of worker processes and merged in index order with
identical results.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..closed_form import closed_form_k_batch, j_from_deltas
from ..errors import BudgetExceeded, InvalidSpec, NoHypothesisHits
from ..solver.core import DEFAULT_CONFIG, FINAL_QUAD_TOL, SEGMENT_REL, SolverConfig, k_distance
from ..solver.quadrature import segments_inside, simpson_costs
from .catalog import BoundSpec, Part, draw, get_bound

MARGIN = 1e-12
CHUNK = 2048
MAX_RECORDED = 100
HIT_RATE_FLOOR = 1e-3
BACKENDS = ("closed_only", "with_numeric")


class Metrics:
    """Access to ``k`` for assertions, in closed-only or numeric mode.

    ``k_lower`` returns the exact value when a closed form applies; otherwise
    the distance ratio metric in numeric mode and NaN in closed-only mode.
    ``k_upper`` returns the exact value when available and otherwise an upper
    estimate: the straight segment when it is admissible and already meets
    ``target``, else the numeric solver stopped at ``target``.
    """

    def __init__(self, mode: str, tol: float, config: SolverConfig = DEFAULT_CONFIG):
        self.mode = mode
        self.tol = tol
        self.config = config
        self.slack = tol if mode == "with_numeric" else 0.0
        self.stats = {"closed_form": 0, "segment": 0, "solver": 0, "budget_exceeded": 0}

    def _closed(self, oracle, X, Y):
        vals, mask = closed_form_k_batch(oracle, X, Y)
        self.stats["closed_form"] += int(mask.sum())
        return vals, mask

    def k_lower(self, oracle, X, Y):
        vals, mask = self._closed(oracle, X, Y)
        if self.mode == "with_numeric" and not mask.all():
            rest = ~mask
            d = np.linalg.norm(X[rest] - Y[rest], axis=1)
            vals[rest] = j_from_deltas(d, oracle.delta_batch(X[rest]), oracle.delta_batch(Y[rest]))
        return vals

    def k_upper(self, oracle, X, Y, target=None):
        vals, mask = self._closed(oracle, X, Y)
        if self.mode != "with_numeric" or mask.all():
            return vals
        rows = np.flatnonzero(~mask)
        target = np.full(X.shape[0], np.inf) if target is None else np.asarray(target, float)
        A, B = X[rows], Y[rows]
        dA, dB = oracle.delta_batch(A), oracle.delta_batch(B)
        inside = segments_inside(oracle, A, B, dA, dB)
        cost = np.full(rows.size, np.inf)
        if inside.any():
            cost[inside] = simpson_costs(oracle, A[inside], B[inside], dA[inside], dB[inside],
                                         tol=FINAL_QUAD_TOL, rel=SEGMENT_REL)
        settled = cost <= target[rows]
        vals[rows[settled]] = cost[settled]
        self.stats["segment"] += int(settled.sum())
        for i in rows[~settled]:
            t = target[i] if math.isfinite(target[i]) else None
            try:
                vals[i] = k_distance(oracle, X[i], Y[i], self.tol, method="numeric", target=t,
                                     config=self.config).value
            except BudgetExceeded:
                self.stats["budget_exceeded"] += 1
                vals[i] = np.nan
            self.stats["solver"] += 1
        return vals


def _row(cfg, i):
    return {k: (v[i].tolist() if np.ndim(v[i]) else float(v[i])) for k, v in cfg.items()}


def _excess(part: Part, slack: float):
    lhs = np.asarray(part.lhs, float)
    rhs = np.asarray(part.rhs, float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    allow = MARGIN * scale
    if part.kind == "eq":
        gap = np.abs(lhs - rhs)
        margin = -gap
    else:
        gap = lhs - rhs
        margin = rhs - lhs
        if part.k_upper:
            allow = allow + slack
    with np.errstate(invalid="ignore"):
        bad = ~(gap <= allow)
    return bad, margin


def _evaluate_chunk(spec: BoundSpec, seed: int, start: int, count: int, mode: str, tol: float,
                    config: SolverConfig):
    cfg = draw(spec, seed, start, count)
    hit = np.asarray(spec.hypothesis(cfg, spec.params), dtype=bool)
    idx = np.flatnonzero(hit)
    out = {"hits": int(idx.size), "violations": [], "count": 0, "min_margin": math.inf,
           "stats": {}}
    if idx.size == 0:
        return out
    sub = {k: v[idx] for k, v in cfg.items()}
    metrics = Metrics(mode, tol, config)
    parts = spec.assertion(sub, spec.params, metrics)
    bad_any = np.zeros(idx.size, dtype=bool)
    records = []
    for p in parts:
        bad, margin = _excess(p, metrics.slack)
        with np.errstate(invalid="ignore"):
            finite = margin[np.isfinite(margin)]
        if finite.size:
            out["min_margin"] = min(out["min_margin"], float(finite.min()))
        for r in np.flatnonzero(bad):
            records.append((int(idx[r]) + start, p.label, float(p.lhs[r]), float(p.rhs[r]),
                            float(margin[r]), r))
        bad_any |= bad
    out["count"] = int(bad_any.sum())
    records.sort(key=lambda t: (t[0], t[1]))
    for sample, label, lhs, rhs, margin, r in records[:MAX_RECORDED]:
        out["violations"].append({"sample": sample, "part": label, "configuration": _row(sub, r),
                                  "lhs": lhs, "rhs": rhs, "margin": margin})
    out["stats"] = metrics.stats
    return out


def _chunk_job(args):
    name, params, seed, start, count, mode, tol, config = args
    return _evaluate_chunk(get_bound(name, **params), seed, start, count, mode, tol, config)


@dataclass
class ViolationReport:
    """Outcome of :func:`check_bound`; ``violations`` is empty exactly when the bound passed."""

    name: str
    citation: str
    samples: int
    hits: int
    violations: list
    violation_count: int
    max_sharpness_defect: float | None
    backend: str
    tol: float
    seed: int
    params: dict = field(default_factory=dict)
    min_margin: float = math.inf
    evaluations: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "citation": self.citation,
            "params": dict(sorted(self.params.items())),
            "backend": self.backend,
            "tol": self.tol,
            "seed": self.seed,
            "samples": self.samples,
            "hits": self.hits,
            "pass": self.passed,
            "violation_count": self.violation_count,
            "violations": self.violations,
            "min_margin": self.min_margin if math.isfinite(self.min_margin) else None,
            "max_sharpness_defect": self.max_sharpness_defect,
            "evaluations": dict(sorted(self.evaluations.items())),
        }


def sharpness_defect(spec: BoundSpec) -> float | None:
    """Largest ``|lhs - rhs|`` over the parts claimed to be equalities at the witnesses."""
    if spec.witness is None:
        return None
    parts = spec.witness(spec.params)
    return float(max(np.max(np.abs(np.asarray(p.lhs) - np.asarray(p.rhs))) for p in parts))


def check_bound(spec: BoundSpec | str, samples: int, seed: int = 0,
                metric_backend: str = "closed_only", tol: float = 1e-3, workers: int = 1,
                config: SolverConfig = DEFAULT_CONFIG) -> ViolationReport:
    """Sample ``samples`` configurations, filter by the hypothesis, test the assertion.

    Closed-form parts must hold up to ``1e-12`` times ``max(1, |lhs|, |rhs|)``;
    upper bounds on ``k`` estimated numerically get the additional slack
    ``tol``.  Raises :class:`NoHypothesisHits` when fewer than
    ``max(1, 1e-3 * samples)`` configurations satisfy the hypothesis.
    """
    if isinstance(spec, str):
        spec = get_bound(spec)
    if samples <= 0:
        raise InvalidSpec("samples must be positive")
    if metric_backend not in BACKENDS:
        raise InvalidSpec(f"unknown backend '{metric_backend}'; expected one of {BACKENDS}")
    if spec.backend == "numeric" and metric_backend == "closed_only":
        raise InvalidSpec(f"bound '{spec.name}' needs the with_numeric backend")
    if not tol > 0:
        raise InvalidSpec("tol must be positive")
    starts = list(range(0, samples, CHUNK))
    jobs = [(s, min(CHUNK, samples - s)) for s in starts]
    try:
        catalogued = get_bound(spec.name, **spec.params).assertion is spec.assertion
    except InvalidSpec:
        catalogued = False
    if workers > 1 and catalogued and len(jobs) > 1:
        args = [(spec.name, spec.params, seed, s, c, metric_backend, tol, config) for s, c in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_job, args))
    else:
        results = [_evaluate_chunk(spec, seed, s, c, metric_backend, tol, config) for s, c in jobs]
    hits = sum(r["hits"] for r in results)
    if hits == 0 or hits < HIT_RATE_FLOOR * samples:
        raise NoHypothesisHits(f"bound '{spec.name}': {hits} of {samples} configurations "
                               "satisfy the hypothesis")
    violations = [v for r in results for v in r["violations"]][:MAX_RECORDED]
    stats: dict = {}
    for r in results:
        for k, v in r["stats"].items():
            stats[k] = stats.get(k, 0) + v
    return ViolationReport(
        name=spec.name,
        citation=spec.citation,
        samples=samples,
        hits=hits,
        violations=violations,
        violation_count=sum(r["count"] for r in results),
        max_sharpness_defect=sharpness_defect(spec),
        backend=metric_backend,
        tol=tol,
        seed=seed,
        params=dict(spec.params),
        min_margin=min((r["min_margin"] for r in results), default=math.inf),
        evaluations=stats,
    )
