"""Local improvement of polylines with respect to ``int |dz| / delta``."""

from __future__ import annotations

import numpy as np

from ..geometry.domains import DomainOracle
from .quadrature import gauss_costs, segments_inside

KAPPA = 0.5


def resample(oracle: DomainOracle, P: np.ndarray, kappa: float = KAPPA, max_vertices: int = 20000):
    """Insert midpoints until every segment satisfies ``|a - b| <= kappa * min(delta(a), delta(b))``.

    Splitting a straight segment leaves its quasihyperbolic length unchanged.
    """
    P = np.asarray(P, float)
    for _ in range(60):
        d = oracle.delta_batch(P)
        L = np.linalg.norm(np.diff(P, axis=0), axis=1)
        long_ = L > kappa * np.minimum(d[:-1], d[1:])
        if not long_.any() or P.shape[0] >= max_vertices:
            break
        mids = 0.5 * (P[:-1][long_] + P[1:][long_])
        pos = np.flatnonzero(long_) + 1
        P = np.insert(P, pos, mids, axis=0)
    return P


def _directions(n, Pprev, Pnext):
    """Unit trial directions: coordinate axes and, in the plane, the path normal."""
    m = Pprev.shape[0]
    axes = np.eye(n)
    dirs = [np.broadcast_to(axes[k], (m, n)) for k in range(n)]
    t = Pnext - Pprev
    nt = np.linalg.norm(t, axis=1, keepdims=True)
    t = np.divide(t, nt, out=np.zeros_like(t), where=nt > 0)
    dirs.append(t)
    if n == 2:
        dirs.append(np.column_stack([-t[:, 1], t[:, 0]]))
    else:
        # two vectors orthogonal to the tangent
        ref = np.where(np.abs(t[:, :1]) < 0.9, axes[0], axes[1])
        u = ref - np.einsum("ij,ij->i", ref, t)[:, None] * t
        u /= np.maximum(np.linalg.norm(u, axis=1, keepdims=True), 1e-300)
        dirs.append(u)
        dirs.append(np.cross(t, u))
    return np.stack(dirs, axis=1)


_GX, _GW = np.polynomial.legendre.leggauss(8)
_GT = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW


def path_cost_and_gradient(oracle: DomainOracle, P: np.ndarray):
    """Gauss estimate of the polyline cost and its gradient in the vertices.

    The gradient of ``1/delta`` at the quadrature nodes uses central
    differences of ``delta`` with steps proportional to ``delta``.  Returns
    ``(inf, None)`` if a node falls outside the domain.
    """
    A, B = P[:-1], P[1:]
    m, n = A.shape
    D = B - A
    L = np.linalg.norm(D, axis=1)
    Z = A[:, None, :] + _GT[None, :, None] * D[:, None, :]
    Zf = Z.reshape(-1, n)
    d = oracle.delta_batch(Zf)
    if np.any(d <= 0):
        return np.inf, None
    eps = 1e-6 * d
    grad_d = np.empty_like(Zf)
    for k in range(n):
        E = np.zeros(n)
        E[k] = 1.0
        dp = oracle.delta_batch(Zf + eps[:, None] * E)
        dm = oracle.delta_batch(Zf - eps[:, None] * E)
        grad_d[:, k] = (dp - dm) / (2.0 * eps)
    f = (1.0 / d).reshape(m, -1)
    gf = (-grad_d / (d * d)[:, None]).reshape(m, -1, n)
    mean_f = f @ _GW
    cost = L * mean_f
    u = np.divide(D, L[:, None], out=np.zeros_like(D), where=L[:, None] > 0)
    gA = -u * mean_f[:, None] + L[:, None] * np.einsum("q,mqn->mn", _GW * (1.0 - _GT), gf)
    gB = u * mean_f[:, None] + L[:, None] * np.einsum("q,mqn->mn", _GW * _GT, gf)
    G = np.zeros_like(P)
    G[:-1] += gA
    G[1:] += gB
    return float(cost.sum()), G


def _feasible(oracle, P):
    d = oracle.delta_batch(P)
    if np.any(d <= 0):
        return False
    L = np.linalg.norm(np.diff(P, axis=0), axis=1)
    return bool(np.all(d[:-1] + d[1:] > L))


def lbfgs_path(oracle: DomainOracle, P, atol: float = 1e-6, max_iter: int = 300, memory: int = 8):
    """Limited-memory BFGS on the interior vertices with backtracking.

    Trial steps that leave the domain or break the segment certificates are
    shortened; only strict decreases are accepted, so the cost never grows.
    """
    P = np.array(P, dtype=float)
    if P.shape[0] <= 2:
        return P
    f, G = path_cost_and_gradient(oracle, P)
    if not np.isfinite(f):
        return P
    S, Y = [], []
    stall = 0
    for _ in range(max_iter):
        g = G[1:-1].ravel()
        q = g.copy()
        alphas = []
        for s_, y_ in reversed(list(zip(S, Y))):
            a = (s_ @ q) / (y_ @ s_)
            alphas.append(a)
            q -= a * y_
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        else:
            dmin = float(oracle.delta_batch(P[1:-1]).min())
            q *= 0.1 * dmin / max(float(np.abs(g).max()), 1e-300)
        for (s_, y_), a in zip(zip(S, Y), reversed(alphas)):
            b = (y_ @ q) / (y_ @ s_)
            q += (a - b) * s_
        direction = -q
        slope = float(g @ direction)
        if slope >= 0:
            S, Y = [], []
            continue
        t = 1.0
        accepted = False
        for _ in range(30):
            Pn = P.copy()
            Pn[1:-1] += t * direction.reshape(-1, P.shape[1])
            if _feasible(oracle, Pn):
                fn, Gn = path_cost_and_gradient(oracle, Pn)
                if fn <= f + 1e-4 * t * slope and fn < f:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            if not S:
                break
            S, Y = [], []
            continue
        s_vec = (Pn - P)[1:-1].ravel()
        y_vec = (Gn - G)[1:-1].ravel()
        if s_vec @ y_vec > 1e-300:
            S.append(s_vec)
            Y.append(y_vec)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
        gain = f - fn
        P, f, G = Pn, fn, Gn
        if gain <= atol:
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
    return P


def smooth_path(oracle: DomainOracle, P, atol: float = 1e-6, max_sweeps: int = 60,
                kappa: float = KAPPA, max_halvings: int = 5):
    """Improve a polyline without ever increasing its cost; endpoints stay fixed.

    Quasi-Newton passes optimize the vertices at segment ratio ``kappa``
    (segments at most ``kappa * delta`` long); the ratio is then halved, and
    the path re-optimized, until a halving gains less than ``10 * atol``.
    A final red-black coordinate descent handles kinks of ``delta`` where the
    gradient is discontinuous: each interior vertex tries moves along the
    axes, the tangent and normal(s), and towards its neighbors' midpoint,
    accepting only certified strict decreases.
    """
    P = resample(oracle, P, kappa)
    if P.shape[0] <= 2:
        return P
    P = lbfgs_path(oracle, P, atol)
    cost = float(gauss_costs(oracle, P[:-1], P[1:]).sum())
    for _ in range(max_halvings):
        kappa *= 0.5
        Q = lbfgs_path(oracle, resample(oracle, P, kappa), atol)
        cq = float(gauss_costs(oracle, Q[:-1], Q[1:]).sum())
        gain = cost - cq
        if cq < cost:
            P, cost = Q, cq
        if gain < 10.0 * atol:
            break
    return coordinate_descent(oracle, P, atol, max_sweeps, kappa)


def coordinate_descent(oracle: DomainOracle, P, atol: float = 1e-6, max_sweeps: int = 60,
                       kappa: float = KAPPA):
    P = resample(oracle, P, kappa)
    m = P.shape[0]
    if m <= 2:
        return P
    n = P.shape[1]
    d = oracle.delta_batch(P)
    cost = gauss_costs(oracle, P[:-1], P[1:])
    L = np.linalg.norm(np.diff(P, axis=0), axis=1)
    step = 0.25 * np.minimum(d, np.concatenate([[np.inf], L]))
    step = np.minimum(step, 0.25 * np.concatenate([L, [np.inf]]))
    stall = 0
    for sweep in range(max_sweeps):
        before = float(cost.sum())
        for parity in (1, 2):
            idx = np.arange(parity, m - 1, 2)
            if idx.size == 0:
                continue
            active = step[idx] > 1e-12 * np.maximum(d[idx], 1e-300)
            idx = idx[active]
            if idx.size == 0:
                continue
            Pa, Pi, Pb = P[idx - 1], P[idx], P[idx + 1]
            dirs = _directions(n, Pa, Pb)
            s = step[idx][:, None, None]
            mid = 0.5 * (Pa + Pb)
            cands = np.concatenate([
                Pi[:, None, :] + s * dirs,
                Pi[:, None, :] - s * dirs,
                mid[:, None, :],
                (0.5 * (Pi + mid))[:, None, :],
            ], axis=1)
            k = cands.shape[1]
            C = cands.reshape(-1, n)
            Ar = np.repeat(Pa, k, axis=0)
            Br = np.repeat(Pb, k, axis=0)
            dC = oracle.delta_batch(C)
            dA = np.repeat(d[idx - 1], k)
            dB = np.repeat(d[idx + 1], k)
            ok = (dC > 0) & (dA + dC > np.linalg.norm(C - Ar, axis=1)) & \
                 (dC + dB > np.linalg.norm(Br - C, axis=1))
            c1 = np.full(C.shape[0], np.inf)
            c2 = np.full(C.shape[0], np.inf)
            if ok.any():
                c1[ok] = gauss_costs(oracle, Ar[ok], C[ok])
                c2[ok] = gauss_costs(oracle, C[ok], Br[ok])
            local = (c1 + c2).reshape(-1, k)
            best = np.argmin(local, axis=1)
            bval = local[np.arange(idx.size), best]
            cur = cost[idx - 1] + cost[idx]
            improve = bval < cur * (1.0 - 1e-15)
            sel = idx[improve]
            if sel.size:
                rows = np.flatnonzero(improve)
                P[sel] = cands[rows, best[rows]]
                d[sel] = dC.reshape(-1, k)[rows, best[rows]]
                cost[sel - 1] = c1.reshape(-1, k)[rows, best[rows]]
                cost[sel] = c2.reshape(-1, k)[rows, best[rows]]
                step[sel] = np.minimum(1.5 * step[sel], 0.25 * d[sel])
            fail = idx[~improve]
            step[fail] *= 0.5
        after = float(cost.sum())
        if before - after <= atol:
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
        if sweep % 10 == 9:
            Pn = resample(oracle, P, kappa)
            if Pn.shape[0] != m:
                P = Pn
                m = P.shape[0]
                d = oracle.delta_batch(P)
                cost = gauss_costs(oracle, P[:-1], P[1:])
                L = np.linalg.norm(np.diff(P, axis=0), axis=1)
                step = 0.25 * np.minimum(d, np.minimum(np.concatenate([[np.inf], L]),
                                                      np.concatenate([L, [np.inf]])))
    P = resample(oracle, P, kappa)
    return P


def certify(oracle: DomainOracle, P) -> bool:
    if P.shape[0] < 2:
        return True
    return bool(np.all(segments_inside(oracle, P[:-1], P[1:])))
