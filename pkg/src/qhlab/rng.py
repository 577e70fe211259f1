"""Splittable 64-bit shift-register random streams.

The generator is fixed bit-for-bit so that sampled configurations can be
reproduced by any implementation:

* ``mix64(z)`` is the SplitMix64 finalizer::

      z = (z + 0x9E3779B97F4A7C15) mod 2**64
      z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
      z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
      return z ^ (z >> 31)

* a stream is identified by a seed and a tuple of integer keys.  Its initial
  state is ``s = mix64(seed mod 2**64)`` followed by ``s = mix64(s ^ mix64(k))``
  for every key ``k`` in order; a zero state is replaced by
  ``0x9E3779B97F4A7C15``.

* each draw advances the state with xorshift64* and returns the product::

      x ^= x >> 12;  x ^= (x << 25) mod 2**64;  x ^= x >> 27
      out = (x * 0x2545F4914F6CDD1D) mod 2**64

* a uniform double in [0, 1) is ``(out >> 11) * 2**-53``.

``StreamBatch`` runs many independent streams side by side in numpy so that
sample ``i`` of a batch depends only on ``(seed, keys..., i)``, never on the
batch size or the evaluation order.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_STAR = 0x2545F4914F6CDD1D


def mix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def name_key(name: str) -> int:
    """Stable integer key for a textual label (CRC-32 of its UTF-8 bytes)."""
    return zlib.crc32(name.encode("utf-8"))


def stream_state(seed: int, *keys: int) -> int:
    s = mix64(seed & MASK64)
    for k in keys:
        s = mix64(s ^ mix64(k & MASK64))
    return s or GOLDEN


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class StreamBatch:
    """A vector of independent xorshift64* streams.

    Stream ``i`` starts from ``stream_state(seed, *keys, start + i)``.
    """

    def __init__(self, seed: int, count: int, *keys: int, start: int = 0):
        base = stream_state(seed, *keys)
        idx = np.arange(start, start + count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            s = _mix64_array(np.uint64(base) ^ _mix64_array(idx))
        s[s == 0] = np.uint64(GOLDEN)
        self.state = s

    @classmethod
    def from_states(cls, states: np.ndarray) -> "StreamBatch":
        obj = cls.__new__(cls)
        obj.state = np.asarray(states, dtype=np.uint64).copy()
        return obj

    def __len__(self) -> int:
        return self.state.shape[0]

    def subset(self, mask: np.ndarray) -> "StreamBatch":
        """Streams selected by ``mask``; shares nothing with the parent."""
        return StreamBatch.from_states(self.state[mask])

    def merge(self, mask: np.ndarray, other: "StreamBatch") -> None:
        """Write advanced states of a subset back into this batch."""
        self.state[mask] = other.state

    def next_u64(self) -> np.ndarray:
        x = self.state
        x ^= x >> np.uint64(12)
        x ^= x << np.uint64(25)
        x ^= x >> np.uint64(27)
        self.state = x
        with np.errstate(over="ignore"):
            return x * np.uint64(_STAR)

    def uniform(self, k: int = 1) -> np.ndarray:
        """Array of shape ``(len(self), k)`` of doubles in [0, 1)."""
        out = np.empty((len(self), k))
        for j in range(k):
            out[:, j] = (self.next_u64() >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return out

    def uniform_box(self, lo, hi) -> np.ndarray:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return lo + (hi - lo) * self.uniform(lo.shape[0])

    def uniform_ball(self, n: int, radius=1.0, center=None) -> np.ndarray:
        """Uniform points in the open ball, by rejection from the cube."""
        out = np.empty((len(self), n))
        pending = np.ones(len(self), dtype=bool)
        while pending.any():
            sub = self.subset(pending)
            cand = 2.0 * sub.uniform(n) - 1.0
            self.merge(pending, sub)
            ok = np.einsum("ij,ij->i", cand, cand) < 1.0
            rows = np.flatnonzero(pending)
            out[rows[ok]] = cand[ok]
            pending[rows[ok]] = False
        out *= np.asarray(radius, dtype=float).reshape(-1, 1) if np.ndim(radius) else radius
        if center is not None:
            out += np.asarray(center, dtype=float)
        return out

    def unit_vectors(self, n: int) -> np.ndarray:
        v = self.uniform_ball(n)
        norm = np.linalg.norm(v, axis=1)
        # a point exactly at the origin has probability 2**-106; fall back to e1
        bad = norm == 0
        v[bad] = 0.0
        v[bad, 0] = 1.0
        norm[bad] = 1.0
        return v / norm[:, None]
