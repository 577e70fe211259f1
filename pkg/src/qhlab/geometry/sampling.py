"""Deterministic rejection sampling of interior point pairs.

Pair ``i`` is drawn from its own stream keyed by ``(seed, "pairs", i)``.  In
round ``r`` every still-pending stream draws ``min(2**r, 4096)`` candidates
and keeps the first one inside ``region`` and the domain, so the result for a
pair never depends on how many other pairs are requested.

Retry budget: if the first round accepts nothing, a pilot of ``2**20``
candidates estimates the acceptance rate and :class:`SamplingExhausted` is
raised when it is below ``1e-6``.  Independently, sampling stops with the
same error after 64 rounds.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidSpec, SamplingExhausted
from ..rng import StreamBatch, name_key
from .domains import DomainOracle

PILOT_SIZE = 1 << 20
MIN_ACCEPTANCE = 1e-6
MAX_ROUNDS = 64
MAX_BATCH = 4096


def default_region(oracle: DomainOracle):
    b = oracle.bounds()
    if b is None:
        raise InvalidSpec("an unbounded domain needs an explicit sampling region")
    return b


def _parse_region(region, n):
    lo, hi = (np.asarray(v, dtype=float) for v in region)
    if lo.shape != (n,) or hi.shape != (n,):
        raise InvalidSpec(f"sampling region must be a pair of {n}-vectors")
    if np.any(hi < lo):
        raise InvalidSpec("sampling region needs lo <= hi")
    return lo, hi


def _draw_points(oracle, streams: StreamBatch, lo, hi):
    n = oracle.dimension
    out = np.empty((len(streams), n))
    pending = np.ones(len(streams), dtype=bool)
    for r in range(MAX_ROUNDS):
        rows = np.flatnonzero(pending)
        if rows.size == 0:
            return out
        m = min(1 << r, MAX_BATCH)
        sub = streams.subset(pending)
        cand = np.stack([sub.uniform_box(lo, hi) for _ in range(m)], axis=1)
        streams.merge(pending, sub)
        ok = oracle.contains_batch(cand.reshape(-1, n)).reshape(rows.size, m)
        hit = ok.any(axis=1)
        first = np.argmax(ok, axis=1)
        out[rows[hit]] = cand[np.flatnonzero(hit), first[hit]]
        pending[rows[hit]] = False
        if r == 0 and not hit.any():
            _pilot(oracle, lo, hi)
    if pending.any():
        raise SamplingExhausted("rejection sampling did not finish within its retry budget")
    return out


def _pilot(oracle, lo, hi):
    s = StreamBatch(0, PILOT_SIZE, name_key("pilot"))
    hits = int(np.count_nonzero(oracle.contains_batch(s.uniform_box(lo, hi))))
    rate = hits / PILOT_SIZE
    if rate < MIN_ACCEPTANCE:
        raise SamplingExhausted(
            f"acceptance rate {rate:.3g} in the sampling region is below {MIN_ACCEPTANCE:g}")


def sample_points(oracle: DomainOracle, count: int, seed: int, region=None, key="points"):
    """``count`` interior points, each from its own seeded stream."""
    if count <= 0:
        raise InvalidSpec("count must be positive")
    lo, hi = _parse_region(region if region is not None else default_region(oracle),
                           oracle.dimension)
    streams = StreamBatch(seed, count, name_key(key))
    return _draw_points(oracle, streams, lo, hi)


def sample_pairs(oracle: DomainOracle, count: int, seed: int, region=None):
    """Independent pairs ``(x, y)`` of interior points, returned as two arrays.

    Both points of pair ``i`` come from the stream ``(seed, "pairs", i)``;
    ``x`` is drawn first.
    """
    if count <= 0:
        raise InvalidSpec("count must be positive")
    lo, hi = _parse_region(region if region is not None else default_region(oracle),
                           oracle.dimension)
    streams = StreamBatch(seed, count, name_key("pairs"))
    X = _draw_points(oracle, streams, lo, hi)
    Y = _draw_points(oracle, streams, lo, hi)
    return X, Y
