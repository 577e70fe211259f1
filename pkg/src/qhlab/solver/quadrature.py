"""Batched line integrals of ``1/delta`` along straight segments."""

from __future__ import annotations

import numpy as np

from ..geometry.domains import DomainOracle

_GL = {k: np.polynomial.legendre.leggauss(k) for k in (4, 8)}


def _points(A, B, t):
    return A + t[:, None] * (B - A)


def segments_inside(oracle: DomainOracle, A, B, dA=None, dB=None, max_depth=12):
    """Certify that every segment ``[A_i, B_i]`` lies in the domain.

    A segment is certified once it is covered by the balls ``B(a, delta(a))``
    and ``B(b, delta(b))`` (``delta(a) + delta(b) > |a - b|``); otherwise it is
    bisected.  A zero distance at any tested point rejects the segment.
    Pieces still undecided after ``max_depth`` bisections are accepted, which
    amounts to sampling the segment at spacing ``|a - b| / 2**max_depth``.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    if dA is None:
        dA = oracle.delta_batch(A)
    if dB is None:
        dB = oracle.delta_batch(B)
    ok = (dA > 0) & (dB > 0)
    seg = np.flatnonzero(ok)
    a, b, da, db = A[seg], B[seg], dA[seg], dB[seg]
    for _ in range(max_depth):
        L = np.linalg.norm(b - a, axis=1)
        open_ = da + db <= L
        if not open_.any():
            break
        seg, a, b, da, db = seg[open_], a[open_], b[open_], da[open_], db[open_]
        m = 0.5 * (a + b)
        dm = oracle.delta_batch(m)
        bad = dm <= 0
        if bad.any():
            ok[seg[bad]] = False
        keep = ~bad & ok[seg]
        seg, a, b, da, db, m, dm = seg[keep], a[keep], b[keep], da[keep], db[keep], m[keep], dm[keep]
        seg = np.concatenate([seg, seg])
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        da, db = np.concatenate([da, dm]), np.concatenate([dm, db])
        if seg.size == 0:
            break
    return ok


def gauss_costs(oracle: DomainOracle, A, B, order=8):
    """Gauss-Legendre estimate of ``int_[a,b] |dz| / delta(z)`` for each segment.

    Returns ``inf`` for segments with a quadrature node outside the domain.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    x, w = _GL[order]
    t = 0.5 * (x + 1.0)
    N, n = A.shape
    Z = (A[:, None, :] + t[None, :, None] * (B - A)[:, None, :]).reshape(-1, n)
    d = oracle.delta_batch(Z).reshape(N, order)
    with np.errstate(divide="ignore"):
        inv = np.where(d > 0, 1.0 / d, np.inf)
    L = np.linalg.norm(B - A, axis=1)
    return 0.5 * L * (inv @ w)


SIMPSON_CHUNK = 1 << 14


def simpson_costs(oracle: DomainOracle, A, B, dA=None, dB=None, tol=1e-10, rel=0.0,
                  max_depth=40):
    """Adaptive Simpson estimate of ``int_[a,b] |dz| / delta(z)`` for each segment.

    Intervals are bisected until the Richardson test
    ``|S_left + S_right - S_whole| <= 15 * tol_piece`` passes, where the
    tolerance ``max(tol, rel * |S_whole|)`` is halved with each bisection.
    Kinks of ``delta`` (corners, medial axis) are resolved by the bisection.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    N = A.shape[0]
    out = np.zeros(N)
    if N == 0:
        return out
    if dA is None:
        dA = oracle.delta_batch(A)
    if dB is None:
        dB = oracle.delta_batch(B)
    if N > SIMPSON_CHUNK:
        # bounded working set: refined segments can each spawn many intervals
        return np.concatenate([
            simpson_costs(oracle, A[s:s + SIMPSON_CHUNK], B[s:s + SIMPSON_CHUNK],
                          dA[s:s + SIMPSON_CHUNK], dB[s:s + SIMPSON_CHUNK], tol, rel, max_depth)
            for s in range(0, N, SIMPSON_CHUNK)
        ])
    L = np.linalg.norm(B - A, axis=1)
    live = L > 0
    if not live.any():
        return out

    def f(d):
        with np.errstate(divide="ignore"):
            return np.where(d > 0, 1.0 / d, np.inf)

    seg = np.flatnonzero(live)
    a = np.zeros(seg.size)
    b = np.ones(seg.size)
    fa = f(dA[seg])
    fb = f(dB[seg])
    fm = f(oracle.delta_batch(0.5 * (A[seg] + B[seg])))
    scale = L[seg]
    whole = scale * (fa + 4 * fm + fb) / 6.0
    eps = np.maximum(tol, rel * np.abs(whole))
    for depth in range(max_depth):
        if seg.size == 0:
            break
        m = 0.5 * (a + b)
        ql = 0.5 * (a + m)
        qr = 0.5 * (m + b)
        Pa, Pb = A[seg], B[seg]
        fl = f(oracle.delta_batch(_points(Pa, Pb, ql)))
        fr = f(oracle.delta_batch(_points(Pa, Pb, qr)))
        h = (b - a) * scale
        left = 0.5 * h * (fa + 4 * fl + fm) / 6.0
        right = 0.5 * h * (fm + 4 * fr + fb) / 6.0
        with np.errstate(invalid="ignore"):
            err = left + right - whole
            done = np.abs(err) <= 15.0 * eps
        if depth == max_depth - 1:
            done[:] = True
        val = left + right + np.where(np.isfinite(err), err / 15.0, 0.0)
        np.add.at(out, seg[done], val[done])
        go = ~done
        seg = np.concatenate([seg[go], seg[go]])
        a, b = np.concatenate([a[go], m[go]]), np.concatenate([m[go], b[go]])
        fa, fb = np.concatenate([fa[go], fm[go]]), np.concatenate([fm[go], fb[go]])
        fm = np.concatenate([fl[go], fr[go]])
        whole = np.concatenate([left[go], right[go]])
        eps = np.concatenate([eps[go], eps[go]]) * 0.5
        scale = L[seg]
    return out
