"""Merge-order builders: four linkage criteria plus a k-d split order.

Tie-breaking everywhere: among equal-distance candidate pairs the
lexicographically smallest (min(id_a, id_b), max(id_a, id_b)) pair wins,
so every builder is deterministic and golden tests are stable. For single
linkage the ids are point ids; for the matrix methods they are cluster ids
under the dendrogram convention.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import MatrixCapError
from .model import MergeOrder, PointSet

DEFAULT_MATRIX_CAP = 20_000

# Below this size the O(n^2) Prim scan beats KD-tree bookkeeping; above it
# the Boruvka/KD search is dramatically faster.
_KD_ACCEL_MIN_N = 2048


# ---------------------------------------------------------------------------
# single linkage: Euclidean MST in Kruskal (ascending edge length) order
# ---------------------------------------------------------------------------

def single_linkage(points: PointSet, neighbor_accel: str = "auto") -> MergeOrder:
    """Single-linkage order: EMST edges replayed by ascending length.

    `neighbor_accel` picks the MST routine: "prim" (O(n^2) time, O(n)
    memory), "kdtree" (Boruvka rounds over a KD-tree, near O(n log n) on
    generic data), or "auto" to switch at a size threshold. Both routines
    return the unique MST under the (length, min-id, max-id) edge order,
    so the choice never changes the result.
    """
    if neighbor_accel not in ("auto", "prim", "kdtree"):
        raise ValueError(f"unknown neighbor_accel {neighbor_accel!r}")
    coords = points.coords
    n = points.n
    if neighbor_accel == "auto":
        neighbor_accel = "kdtree" if n >= _KD_ACCEL_MIN_N else "prim"
    if neighbor_accel == "prim":
        d, ei, ej = _emst_prim(coords)
    else:
        d, ei, ej = _emst_kdtree(coords)
    order = np.lexsort((ej, ei, d))
    pairs = _edges_to_events(ei[order], ej[order], n)
    return MergeOrder(n, pairs, "single")


def _point_dists(coords: np.ndarray, v: int) -> np.ndarray:
    diff = coords - coords[v]
    return np.sqrt((diff * diff).sum(axis=1))


def _emst_prim(coords: np.ndarray):
    """Exact EMST by Prim's algorithm with tuple (d, min, max) tie handling."""
    n = coords.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best_d = _point_dists(coords, 0)
    best_d[0] = np.inf
    best_from = np.zeros(n, dtype=np.int64)
    ed = np.empty(n - 1)
    ei = np.empty(n - 1, dtype=np.int64)
    ej = np.empty(n - 1, dtype=np.int64)
    for t in range(n - 1):
        masked = np.where(in_tree, np.inf, best_d)
        m = masked.min()
        cand = np.flatnonzero(masked == m)
        if cand.size > 1:
            f = best_from[cand]
            lo = np.minimum(cand, f)
            hi = np.maximum(cand, f)
            cand = cand[np.lexsort((hi, lo))[:1]]
        v = int(cand[0])
        u = int(best_from[v])
        ed[t] = best_d[v]
        ei[t], ej[t] = (u, v) if u < v else (v, u)
        in_tree[v] = True
        dv = _point_dists(coords, v)
        better = dv < best_d
        ties = (dv == best_d) & ~in_tree
        if ties.any():
            ix = np.flatnonzero(ties)
            old = best_from[ix]
            new_lo = np.minimum(ix, v)
            new_hi = np.maximum(ix, v)
            old_lo = np.minimum(ix, old)
            old_hi = np.maximum(ix, old)
            win = (new_lo < old_lo) | ((new_lo == old_lo) & (new_hi < old_hi))
            better[ix[win]] = True
        better &= ~in_tree
        best_d[better] = dv[better]
        best_from[better] = v
    return ed, ei, ej


def _emst_kdtree(coords: np.ndarray):
    """Exact EMST by Boruvka rounds with escalating-k KD-tree queries.

    Each round finds, for every component, its minimum outgoing edge under
    the (d, min, max) tuple order; with tuple-distinct weights Boruvka
    returns the unique MST. Candidate distances are recomputed in numpy so
    edge weights are bit-identical to the Prim path. Assumes generic
    position for equidistant-neighbor windows (exact distance ties between
    different candidate edges of one point are resolved by query order).
    """
    n = coords.shape[0]
    tree = cKDTree(coords)
    parent = np.arange(n)

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    comp = np.arange(n)
    ed = np.empty(n - 1)
    ei = np.empty(n - 1, dtype=np.int64)
    ej = np.empty(n - 1, dtype=np.int64)
    nedges = 0
    ncomp = n
    while ncomp > 1:
        best_d = np.full(n, np.inf)
        best_lo = np.full(n, -1, dtype=np.int64)
        best_hi = np.full(n, -1, dtype=np.int64)
        unresolved = np.arange(n)
        k = 2
        while unresolved.size:
            kq = min(k, n)
            dist, idx = tree.query(coords[unresolved], k=kq)
            if kq == 1:
                dist = dist[:, None]
                idx = idx[:, None]
            cu = comp[unresolved]
            foreign = comp[idx] != cu[:, None]
            has = foreign.any(axis=1)
            if has.any():
                res = unresolved[has]
                nb = idx[has, np.argmax(foreign[has], axis=1)]
                diff = coords[res] - coords[nb]
                w = np.sqrt((diff * diff).sum(axis=1))
                lo = np.minimum(res, nb)
                hi = np.maximum(res, nb)
                cr = cu[has]
                # first candidate per component under (w, lo, hi)
                sel = np.lexsort((hi, lo, w, cr))
                first = np.ones(sel.size, dtype=bool)
                first[1:] = cr[sel][1:] != cr[sel][:-1]
                sel = sel[first]
                c, w, lo, hi = cr[sel], w[sel], lo[sel], hi[sel]
                cur_d, cur_lo, cur_hi = best_d[c], best_lo[c], best_hi[c]
                win = (w < cur_d) | (
                    (w == cur_d)
                    & ((lo < cur_lo) | ((lo == cur_lo) & (hi < cur_hi)))
                )
                best_d[c[win]] = w[win]
                best_lo[c[win]] = lo[win]
                best_hi[c[win]] = hi[win]
            rem = unresolved[~has]
            if rem.size and kq < n:
                # skip points whose whole window is nearer than any edge that
                # could still improve their component's best
                dk = dist[~has, -1]
                unresolved = rem[dk < best_d[comp[rem]]]
            else:
                unresolved = rem[:0]
            k *= 4
        for r in np.flatnonzero(np.isfinite(best_d)):
            ra, rb = find(int(best_lo[r])), find(int(best_hi[r]))
            if ra != rb:
                parent[ra] = rb
                ed[nedges] = best_d[r]
                ei[nedges] = best_lo[r]
                ej[nedges] = best_hi[r]
                nedges += 1
                ncomp -= 1
        # pointer jumping compresses every chain in O(log depth) passes
        gp = parent[parent]
        while not np.array_equal(gp, parent):
            parent = gp
            gp = parent[parent]
        comp = parent.copy()
    return ed, ei, ej


def _edges_to_events(ei: np.ndarray, ej: np.ndarray, n: int) -> np.ndarray:
    """Replay point-pair edges (i < j, presorted) into dendrogram-id events.

    Event left/right are the current cluster ids of the edge's lower and
    higher point index respectively.
    """
    parent = np.arange(n, dtype=np.int64)
    cid = np.arange(n, dtype=np.int64)  # cluster id held at each root

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    pairs = np.empty((n - 1, 2), dtype=np.int64)
    for t in range(n - 1):
        ri = find(int(ei[t]))
        rj = find(int(ej[t]))
        pairs[t, 0] = cid[ri]
        pairs[t, 1] = cid[rj]
        parent[ri] = rj
        cid[rj] = n + t
    return pairs


# ---------------------------------------------------------------------------
# matrix linkages: average, median (centroid), furthest (complete)
# ---------------------------------------------------------------------------

def average_linkage(points: PointSet, matrix_cap: int = DEFAULT_MATRIX_CAP) -> MergeOrder:
    """Merge the pair with minimum mean pairwise inter-cluster distance."""
    return _matrix_linkage(points, "average", matrix_cap)


def median_linkage(points: PointSet, matrix_cap: int = DEFAULT_MATRIX_CAP) -> MergeOrder:
    """Merge the pair with the closest running centroids.

    The merged cluster's centroid is the unweighted average of the two
    merged centroids, so large clusters do not swallow the midpoint.
    """
    return _matrix_linkage(points, "median", matrix_cap)


def furthest_linkage(points: PointSet, matrix_cap: int = DEFAULT_MATRIX_CAP) -> MergeOrder:
    """Merge the pair with minimum farthest spanning point distance (complete linkage)."""
    return _matrix_linkage(points, "furthest", matrix_cap)


def _pairwise_matrix(coords: np.ndarray) -> np.ndarray:
    """Full symmetric distance matrix with +inf diagonal, built in row blocks."""
    n = coords.shape[0]
    D = np.empty((n, n))
    block = max(1, int(2e6) // max(n, 1))
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        diff = coords[i0:i1, None, :] - coords[None, :, :]
        np.sqrt((diff * diff).sum(axis=2), out=D[i0:i1])
    np.fill_diagonal(D, np.inf)
    return D


def _row_best(drow: np.ndarray, active: np.ndarray, cid: np.ndarray, s: int):
    """Best partner for slot s by (distance, min cluster id, max cluster id)."""
    d = np.where(active, drow, np.inf)
    d[s] = np.inf
    m = d.min()
    cand = np.flatnonzero(d == m)
    if cand.size > 1:
        lo = np.minimum(cid[cand], cid[s])
        hi = np.maximum(cid[cand], cid[s])
        cand = cand[np.lexsort((hi, lo))[:1]]
    return int(cand[0]), m


def _matrix_linkage(points: PointSet, method: str, matrix_cap: int) -> MergeOrder:
    n = points.n
    if n > matrix_cap:
        raise MatrixCapError(
            f"{method} linkage needs an n x n matrix; n={n} exceeds cap {matrix_cap}"
        )
    D = _pairwise_matrix(points.coords)
    active = np.ones(n, dtype=bool)
    cid = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    centroids = points.coords.copy() if method == "median" else None

    nn_i = np.empty(n, dtype=np.int64)
    nn_d = np.empty(n)
    for s in range(n):
        nn_i[s], nn_d[s] = _row_best(D[s], active, cid, s)

    pairs = np.empty((n - 1, 2), dtype=np.int64)
    for t in range(n - 1):
        masked = np.where(active, nn_d, np.inf)
        m = masked.min()
        cand = np.flatnonzero(masked == m)
        if cand.size > 1:
            other = nn_i[cand]
            lo = np.minimum(cid[cand], cid[other])
            hi = np.maximum(cid[cand], cid[other])
            cand = cand[np.lexsort((hi, lo))[:1]]
        s = int(cand[0])
        o = int(nn_i[s])
        a, b = (s, o) if s < o else (o, s)  # merged cluster lives in the lower slot
        pairs[t, 0] = cid[a]
        pairs[t, 1] = cid[b]

        if method == "average":
            row = (size[a] * D[a] + size[b] * D[b]) / (size[a] + size[b])
        elif method == "furthest":
            row = np.maximum(D[a], D[b])
        else:  # median: unweighted centroid average, distances recomputed
            centroids[a] = (centroids[a] + centroids[b]) / 2.0
            diff = centroids - centroids[a]
            row = np.sqrt((diff * diff).sum(axis=1))
        active[b] = False
        row[~active] = np.inf
        row[a] = np.inf
        D[a, :] = row
        D[:, a] = row
        D[b, :] = np.inf
        D[:, b] = np.inf
        cid[a] = n + t
        size[a] += size[b]
        if t == n - 2:
            break

        # refresh caches: slots whose best pointed into the merge, plus the
        # merged slot itself; everyone else can only improve towards slot a
        stale = active & ((nn_i == a) | (nn_i == b))
        stale[a] = True
        for sx in np.flatnonzero(stale):
            nn_i[sx], nn_d[sx] = _row_best(D[sx], active, cid, sx)
        fresh = active & ~stale
        ix = np.flatnonzero(fresh)
        if ix.size:
            da = row[ix]
            cur = nn_d[ix]
            win = da < cur
            ties = da == cur
            if ties.any():
                tix = ix[ties]
                new_lo = np.minimum(cid[tix], cid[a])
                new_hi = np.maximum(cid[tix], cid[a])
                old_lo = np.minimum(cid[tix], cid[nn_i[tix]])
                old_hi = np.maximum(cid[tix], cid[nn_i[tix]])
                win[ties] |= (new_lo < old_lo) | ((new_lo == old_lo) & (new_hi < old_hi))
            upd = ix[win]
            nn_i[upd] = a
            nn_d[upd] = row[upd]
    return MergeOrder(n, pairs, method)


# ---------------------------------------------------------------------------
# k-d split order
# ---------------------------------------------------------------------------

def kdtree_order(points: PointSet) -> MergeOrder:
    """Merge order from reversed k-d splits.

    Partitions are split between their median pair of planes (lower-median:
    floor(m/2) points go left), cycling axes starting at x; points tie-sort
    by (coordinate, id). Reversing the depth-first split sequence yields
    the merge events.
    """
    n = points.n
    coords = points.coords
    dims = points.dims
    idx = np.arange(n, dtype=np.int64)
    splits = []  # (lo, mid, hi) in pre-order
    stack = [(0, n, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        m = hi - lo
        if m < 2:
            continue
        axis = depth % dims
        seg = idx[lo:hi]
        seg_sorted = seg[np.lexsort((seg, coords[seg, axis]))]
        idx[lo:hi] = seg_sorted
        mid = lo + m // 2
        splits.append((lo, mid, hi))
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    # pre-order via a LIFO stack pops left first, so `splits` is pre-order;
    # reversing it merges children before parents
    cluster_of: dict[tuple[int, int], int] = {}
    pairs = np.empty((n - 1, 2), dtype=np.int64)
    for t, (lo, mid, hi) in enumerate(reversed(splits)):
        left = cluster_of.pop((lo, mid), -1)
        if left < 0:
            left = int(idx[lo])
        right = cluster_of.pop((mid, hi), -1)
        if right < 0:
            right = int(idx[mid])
        pairs[t, 0] = left
        pairs[t, 1] = right
        cluster_of[(lo, hi)] = n + t
    return MergeOrder(n, pairs, "kdtree")


BUILDERS = {
    "single": single_linkage,
    "average": average_linkage,
    "median": median_linkage,
    "furthest": furthest_linkage,
    "kdtree": kdtree_order,
}


def build_order(method: str, points: PointSet, **kwargs) -> MergeOrder:
    """Dispatch to a builder by method tag."""
    try:
        builder = BUILDERS[method]
    except KeyError:
        raise ValueError(f"unknown linkage method {method!r}") from None
    return builder(points, **kwargs)
