"""Boundary-adapted quadtree/octree meshes and their weighted neighbor graphs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.spatial import cKDTree

from ..errors import BudgetExceeded
from ..geometry.domains import DomainOracle
from .quadrature import segments_inside, simpson_costs

# neighbor radius in units of the querying cell's size: covers the 16-point
# stencil (offsets (1,0), (1,1), (2,1)) in 2D and the 26 neighbors plus
# knight moves (2,1,0) in 3D
STENCIL_RADIUS = 2.3


@dataclass
class MeshGraph:
    """Interior nodes with a sparse graph of certified straight edges.

    Edge weights are quadrature estimates of ``int |dz| / delta`` clamped
    from below by the distance ratio metric of the edge's endpoints.
    """

    nodes: np.ndarray
    sizes: np.ndarray
    deltas: np.ndarray
    graph: csr_matrix
    resolution: float
    region: tuple

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def edge_count(self) -> int:
        return self.graph.nnz // 2


def _children_offsets(n):
    return np.array(list(itertools.product((-0.25, 0.25), repeat=n)))


def refine_cells(oracle: DomainOracle, region, h: float, rel: float, floor_fn, max_nodes: int):
    """Leaf cells of the adaptive tree over ``region`` whose centers are interior.

    A cell of side ``s`` is split while ``s > max(min(h, rel * delta), floor)``
    with ``delta`` the distance of its center to the boundary (0 for cells
    straddling the boundary).  Cells lying entirely outside the domain are
    dropped.  Returns ``(centers, sizes, deltas)``.
    """
    lo, hi = (np.asarray(v, float) for v in region)
    n = lo.shape[0]
    ext = hi - lo
    root = float(ext.max()) / 4.0
    counts = np.maximum(1, np.ceil(ext / root - 1e-9)).astype(int)
    axes = [lo[i] + root * (np.arange(counts[i]) + 0.5) for i in range(n)]
    C = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    s = root
    offs = _children_offsets(n)
    half_diag = 0.5 * math.sqrt(n)
    out_c, out_s, out_d = [], [], []
    total = 0
    while C.shape[0]:
        bd = oracle.boundary_distance(C)
        member = oracle.contains_batch(C)
        keep = member | (bd < s * half_diag)
        C, bd, member = C[keep], bd[keep], member[keep]
        d = np.where(member, bd, 0.0)
        target = np.maximum(np.minimum(h, rel * d), floor_fn(C))
        split = s > target
        leaf = ~split & member
        out_c.append(C[leaf])
        out_d.append(d[leaf])
        out_s.append(np.full(int(leaf.sum()), s))
        total += int(leaf.sum())
        parents = C[split]
        if total + parents.shape[0] * offs.shape[0] > max_nodes:
            raise BudgetExceeded(f"mesh would exceed {max_nodes} nodes")
        C = (parents[:, None, :] + s * offs[None, :, :]).reshape(-1, n)
        s *= 0.5
        if s < 1e-14 * root:
            break
    return np.concatenate(out_c), np.concatenate(out_s), np.concatenate(out_d)


def neighbor_pairs(nodes, sizes, radius_factor=STENCIL_RADIUS):
    """Unique pairs ``(i, j)``, ``i < j``, with ``|p_i - p_j| <= radius_factor * size`` of either node."""
    tree = cKDTree(nodes)
    I, J = [], []
    for s in np.unique(sizes):
        idx = np.flatnonzero(sizes == s)
        sub = cKDTree(nodes[idx])
        res = sub.sparse_distance_matrix(tree, radius_factor * s, output_type="ndarray")
        I.append(idx[res["i"]])
        J.append(res["j"])
    I = np.concatenate(I)
    J = np.concatenate(J)
    a, b = np.minimum(I, J), np.maximum(I, J)
    keep = a != b
    key = np.unique(a[keep].astype(np.int64) * nodes.shape[0] + b[keep])
    return key // nodes.shape[0], key % nodes.shape[0]


EDGE_CHUNK = 1 << 17


def edge_weights(oracle, P, Q, dP, dQ, rel=1e-4):
    """Certified edges and their weights; uncertified edges get ``inf``."""
    if P.shape[0] > EDGE_CHUNK:
        return np.concatenate([
            edge_weights(oracle, P[s:s + EDGE_CHUNK], Q[s:s + EDGE_CHUNK],
                         dP[s:s + EDGE_CHUNK], dQ[s:s + EDGE_CHUNK], rel)
            for s in range(0, P.shape[0], EDGE_CHUNK)
        ])
    ok = segments_inside(oracle, P, Q, dP, dQ)
    w = np.full(P.shape[0], np.inf)
    if ok.any():
        cost = simpson_costs(oracle, P[ok], Q[ok], dP[ok], dQ[ok], tol=0.0, rel=rel, max_depth=8)
        L = np.linalg.norm(Q[ok] - P[ok], axis=1)
        jlow = np.log1p(L / np.minimum(dP[ok], dQ[ok]))
        w[ok] = np.maximum(cost, jlow)
    return w


def build_mesh(oracle: DomainOracle, region, h: float, rel: float, floor_fn,
               max_nodes: int = 2_000_000) -> MeshGraph:
    C, S, D = refine_cells(oracle, region, h, rel, floor_fn, max_nodes)
    I, J = neighbor_pairs(C, S)
    w = np.concatenate([
        edge_weights(oracle, C[I[s:s + EDGE_CHUNK]], C[J[s:s + EDGE_CHUNK]],
                     D[I[s:s + EDGE_CHUNK]], D[J[s:s + EDGE_CHUNK]])
        for s in range(0, I.shape[0], EDGE_CHUNK)
    ]) if I.size else np.zeros(0)
    fin = np.isfinite(w)
    I, J, w = I[fin], J[fin], w[fin]
    N = C.shape[0]
    G = coo_matrix((np.concatenate([w, w]), (np.concatenate([I, J]), np.concatenate([J, I]))),
                   shape=(N, N)).tocsr()
    lo, hi = (np.asarray(v, float) for v in region)
    return MeshGraph(C, S, D, G, h, (lo, hi))


def attach_points(oracle, mesh: MeshGraph, points, dpts, spacing_factor=3.0):
    """Edges from extra points to mesh nodes within ``spacing_factor`` local spacings.

    The search radius doubles until at least one certified edge is found or
    the whole region is covered.  Returns lists of ``(node_indices, weights)``.
    """
    tree = cKDTree(mesh.nodes)
    diam = float(np.linalg.norm(mesh.region[1] - mesh.region[0]))
    out = []
    for p, dp in zip(points, dpts):
        _, k = tree.query(p)
        r = spacing_factor * mesh.sizes[k]
        while True:
            idx = np.asarray(tree.query_ball_point(p, r), dtype=np.int64)
            if idx.size:
                P = np.repeat(p[None, :], idx.size, axis=0)
                w = edge_weights(oracle, P, mesh.nodes[idx], np.full(idx.size, dp), mesh.deltas[idx])
                fin = np.isfinite(w)
                if fin.any():
                    out.append((idx[fin], w[fin]))
                    break
            if r > 2 * diam:
                out.append((np.zeros(0, dtype=np.int64), np.zeros(0)))
                break
            r *= 2.0
    return out
